#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "specmt/spec_model.hpp"

namespace specmt::prompt {

enum class Mode { basic, spec_translate, spec_postedit };

std::string_view to_string(Mode mode);
/// Accepts the canonical names and the CLI short forms basic|spec|pe.
Mode parse_mode(std::string_view s);
inline bool is_spec_mode(Mode m) { return m != Mode::basic; }

inline constexpr std::string_view kCompanyPlaceholder = "[company name]";

/// Instruction blocks, one per mode. Only `[company name]` is substituted.
struct TemplateSet {
  std::string version;
  std::string basic;
  std::string spec_translate;
  std::string spec_postedit;

  const std::string& for_mode(Mode m) const;
};

/// The shipped v1 templates (also stored under resources/templates/v1).
const TemplateSet& builtin_templates();

/// Loads basic.txt, spec_translate.txt and spec_postedit.txt from `dir`.
/// One trailing newline per file is dropped.
TemplateSet load_templates(const std::filesystem::path& dir);

struct PromptRequest {
  Mode mode = Mode::basic;
  std::optional<spec::SpecDocument> spec;
  std::string company_name;
  /// Source text for basic/spec_translate, MT output for spec_postedit.
  std::string payload_text;
  /// Verbalize the optional spec parameters in an extra block.
  bool include_appendix = false;
};

struct RenderedPrompt {
  std::string text;
  std::string fingerprint;
  Mode mode = Mode::basic;
  std::string payload;  // the payload alone, for adapters that send only text

  friend bool operator==(const RenderedPrompt&, const RenderedPrompt&) = default;
};

/// instruction + "\n\n" [+ appendix block + "\n\n"] + payload.
RenderedPrompt build_prompt(const PromptRequest& request,
                            const TemplateSet& templates = builtin_templates());

std::string prompt_fingerprint(Mode mode, std::string_view text);

}  // namespace specmt::prompt
