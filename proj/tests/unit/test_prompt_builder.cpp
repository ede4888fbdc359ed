#include <doctest.h>

#include "oracles/reference_tables.hpp"
#include "specmt/error.hpp"
#include "specmt/prompt_builder.hpp"
#include "support.hpp"

using namespace specmt;
using namespace specmt::prompt;

namespace {

spec::SpecDocument minimal_spec() {
  spec::SpecDocument s;
  s.purpose = "Investor relations.";
  s.audience = "Overseas investors.";
  s.style_register_tone = "Plain.";
  return s;
}

std::string replace_company(std::string_view tmpl, std::string_view company) {
  std::string s(tmpl);
  const auto at = s.find(kCompanyPlaceholder);
  if (at != std::string::npos) s.replace(at, kCompanyPlaceholder.size(), company);
  return s;
}

}  // namespace

TEST_CASE("builtin templates equal the resource files") {
  const auto files = load_templates(std::string(SPECMT_RESOURCE_DIR) + "/templates/v1");
  const auto& b = builtin_templates();
  CHECK(files.basic == b.basic);
  CHECK(files.spec_translate == b.spec_translate);
  CHECK(files.spec_postedit == b.spec_postedit);
  CHECK(b.basic == oracle::kPromptBasic);
  CHECK(b.spec_translate == oracle::kPromptSpec);
  CHECK(b.spec_postedit == oracle::kPromptPostEdit);
}

TEST_CASE("rendered prompts are template plus payload") {
  PromptRequest basic;
  basic.payload_text = "原文です。";
  CHECK(build_prompt(basic).text == std::string(oracle::kPromptBasic) + "\n\n原文です。");

  PromptRequest spec_req{Mode::spec_translate, minimal_spec(), "ANA Holdings Inc.", "原文です。", false};
  CHECK(build_prompt(spec_req).text ==
        replace_company(oracle::kPromptSpec, "ANA Holdings Inc.") + "\n\n原文です。");

  PromptRequest pe{Mode::spec_postedit, minimal_spec(), "ANA Holdings Inc.", "Machine output.", false};
  const auto r = build_prompt(pe);
  CHECK(r.text == replace_company(oracle::kPromptPostEdit, "ANA Holdings Inc.") + "\n\nMachine output.");
  CHECK(r.payload == "Machine output.");
  CHECK(r.mode == Mode::spec_postedit);
}

TEST_CASE("appendix block lists optional parameters only when asked") {
  auto s = minimal_spec();
  s.glossary = {{"統合報告書", "integrated report"}};
  s.localization = "US spelling.";
  PromptRequest req{Mode::spec_translate, s, "Acme", "本文", false};
  CHECK(build_prompt(req).text.find("Additional specifications") == std::string::npos);
  req.include_appendix = true;
  const auto text = build_prompt(req).text;
  CHECK(text.find("Additional specifications:\n- Glossary: 統合報告書 = integrated report\n- Localization needs: "
                  "US spelling.\n\n本文") != std::string::npos);
}

TEST_CASE("fingerprint depends on mode and text") {
  PromptRequest a;
  a.payload_text = "x";
  const auto fa = build_prompt(a).fingerprint;
  CHECK(fa == build_prompt(a).fingerprint);
  a.payload_text = "y";
  CHECK(build_prompt(a).fingerprint != fa);
  CHECK(prompt_fingerprint(Mode::basic, "t") != prompt_fingerprint(Mode::spec_translate, "t"));
}

TEST_CASE("prompt preconditions") {
  const auto code = [](const PromptRequest& r) {
    try {
      build_prompt(r);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io;
  };
  CHECK(code({Mode::spec_translate, std::nullopt, "Acme", "x", false}) == Errc::precondition);
  CHECK(code({Mode::basic, minimal_spec(), "", "x", false}) == Errc::precondition);
  auto incomplete = minimal_spec();
  incomplete.audience.clear();
  CHECK(code({Mode::spec_translate, incomplete, "Acme", "x", false}) == Errc::precondition);
  CHECK(code({Mode::spec_translate, minimal_spec(), " ", "x", false}) == Errc::invalid_argument);
  CHECK(code({Mode::basic, std::nullopt, "", "  \n", false}) == Errc::empty_input);
  CHECK(code({Mode::basic, std::nullopt, "", "\xfe", false}) == Errc::encoding);
  CHECK(code({Mode::basic, std::nullopt, "", "see [company name]", false}) == Errc::invalid_argument);
}

TEST_CASE("post-edit prompt never carries the source text") {
  const std::string source = "当社は空の旅を通じて人々をつなぎます。";
  const std::string mt = "We connect people through air travel.";
  PromptRequest pe{Mode::spec_postedit, minimal_spec(), "Acme", mt, true};
  const auto r = build_prompt(pe);
  CHECK(r.text.find(source) == std::string::npos);
  CHECK(r.text.find(mt) != std::string::npos);
}

TEST_CASE("template directories") {
  test::TempDir dir;
  dir.write("basic.txt", "Translate {x}.\n");
  dir.write("spec_translate.txt", "For [company name].\n");
  dir.write("spec_postedit.txt", "Revise for [company name].");
  const auto t = load_templates(dir.path());
  CHECK(t.basic == "Translate {x}.");
  CHECK(t.spec_postedit == "Revise for [company name].");
  dir.write("basic.txt", "\n");
  CHECK_THROWS_AS(load_templates(dir.path()), Error);
  CHECK(parse_mode("pe") == Mode::spec_postedit);
  CHECK(parse_mode("spec") == Mode::spec_translate);
  CHECK_THROWS_AS(parse_mode("fancy"), Error);
}
