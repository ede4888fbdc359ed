#include "specmt/prompt_builder.hpp"

#include "specmt/error.hpp"
#include "specmt/hash.hpp"
#include "specmt/io.hpp"
#include "specmt/text.hpp"

namespace specmt::prompt {
namespace {

std::string substitute(std::string_view tmpl, std::string_view company) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto hit = tmpl.find(kCompanyPlaceholder, pos);
    out += tmpl.substr(pos, hit - pos);
    if (hit == std::string_view::npos) return out;
    out += company;
    pos = hit + kCompanyPlaceholder.size();
  }
}

std::string strip_one_newline(std::string s) {
  s = text::normalize_line_endings(s);
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::string appendix_block(const spec::SpecDocument& s) {
  std::string block;
  const auto item = [&block](std::string_view label, std::string_view value) {
    const auto v = text::trim(value);
    if (v.empty()) return;
    block += "- ";
    block += label;
    block += ": ";
    block += v;
    block += '\n';
  };
  item("Terminology and reference resources", s.terminology);
  for (const auto& g : s.glossary) item("Glossary", g.term + " = " + g.rendering);
  item("Domain and legal requirements", s.domain_legal);
  item("Cultural adaptation", s.cultural_adaptation);
  item("Length and formatting", s.length_formatting);
  item("Localization needs", s.localization);
  for (const auto& f : s.appendix) item(f.name, f.text);
  if (block.empty()) return {};
  block.pop_back();
  return "Additional specifications:\n" + block;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::basic: return "basic";
    case Mode::spec_translate: return "spec_translate";
    case Mode::spec_postedit: return "spec_postedit";
  }
  return "basic";
}

Mode parse_mode(std::string_view s) {
  if (s == "basic") return Mode::basic;
  if (s == "spec" || s == "spec_translate") return Mode::spec_translate;
  if (s == "pe" || s == "spec_postedit") return Mode::spec_postedit;
  throw Error(Errc::invalid_argument, "unknown prompt mode '" + std::string(s) + "'");
}

const std::string& TemplateSet::for_mode(Mode m) const {
  switch (m) {
    case Mode::basic: return basic;
    case Mode::spec_translate: return spec_translate;
    case Mode::spec_postedit: return spec_postedit;
  }
  return basic;
}

const TemplateSet& builtin_templates() {
  static const TemplateSet kV1{
      "v1",
      "Please translate the following Japanese text into English.",
      "The following Japanese text is an excerpt from the integrated report of [company name], a "
      "key part of the company's investor relations materials. Please translate this text into "
      "English in a way that will be appealing to international investors. The purpose of this "
      "translation is to enhance the company's appeal to a wider audience of investors. Please do "
      "not add any additional information.",
      "The following text is a translation of an excerpt from the integrated report of [company "
      "name], a key part of the company's investor relations materials. The purpose of this "
      "translation is to enhance the company's appeal to a wider audience of investors. The "
      "initial translation was done using Google Translate. Please refine this translation to "
      "make it more engaging and appealing in English. Please do not add any additional "
      "information.",
  };
  return kV1;
}

TemplateSet load_templates(const std::filesystem::path& dir) {
  TemplateSet set;
  set.version = dir.filename().string();
  set.basic = strip_one_newline(io::read_file(dir / "basic.txt"));
  set.spec_translate = strip_one_newline(io::read_file(dir / "spec_translate.txt"));
  set.spec_postedit = strip_one_newline(io::read_file(dir / "spec_postedit.txt"));
  for (const auto* t : {&set.basic, &set.spec_translate, &set.spec_postedit}) {
    if (!text::is_valid_utf8(*t)) throw Error(Errc::encoding, "template is not valid UTF-8");
    if (text::is_blank(*t)) throw Error(Errc::empty_input, "empty template in " + dir.string());
  }
  return set;
}

std::string prompt_fingerprint(Mode mode, std::string_view text) {
  std::string buf = "specmt-prompt-v1\n";
  buf += to_string(mode);
  buf += '\n';
  buf += text;
  return sha256_hex(buf);
}

RenderedPrompt build_prompt(const PromptRequest& request, const TemplateSet& templates) {
  const bool spec_mode = is_spec_mode(request.mode);
  if (spec_mode && !request.spec) {
    throw Error(Errc::precondition, std::string(to_string(request.mode)) + " mode requires a spec");
  }
  if (!spec_mode && request.spec) {
    throw Error(Errc::precondition, "basic mode does not take a spec");
  }
  if (request.spec) {
    const auto report = spec::validate_spec(*request.spec);
    if (!report.valid) {
      std::string missing;
      for (const auto& m : report.missing_essential) missing += (missing.empty() ? "" : ", ") + m;
      throw Error(Errc::precondition, "spec is missing essential parameters: " + missing);
    }
  }
  const std::string& tmpl = templates.for_mode(request.mode);
  const bool needs_company = spec_mode || tmpl.find(kCompanyPlaceholder) != std::string::npos;
  const auto company = text::trim(request.company_name);
  if (needs_company && company.empty()) {
    throw Error(Errc::invalid_argument, "company name is required for this template");
  }
  if (company.find(kCompanyPlaceholder) != std::string_view::npos) {
    throw Error(Errc::invalid_argument, "company name may not contain the template placeholder");
  }
  if (!text::is_valid_utf8(request.payload_text) || !text::is_valid_utf8(company)) {
    throw Error(Errc::encoding, "prompt input is not valid UTF-8");
  }
  std::string payload = text::normalize_line_endings(request.payload_text);
  if (text::is_blank(payload)) throw Error(Errc::empty_input, "payload text is empty");

  RenderedPrompt out;
  out.mode = request.mode;
  out.text = substitute(tmpl, company);
  if (spec_mode && request.include_appendix) {
    const std::string block = appendix_block(*request.spec);
    if (!block.empty()) out.text += "\n\n" + block;
  }
  out.text += "\n\n";
  out.text += payload;
  out.payload = std::move(payload);
  if (out.text.find(kCompanyPlaceholder) != std::string::npos) {
    throw Error(Errc::invalid_argument, "input contains the literal template placeholder");
  }
  out.fingerprint = prompt_fingerprint(out.mode, out.text);
  return out;
}

}  // namespace specmt::prompt
