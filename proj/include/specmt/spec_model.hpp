#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace specmt::spec {

struct GlossaryEntry {
  std::string term;
  std::string rendering;

  friend bool operator==(const GlossaryEntry&, const GlossaryEntry&) = default;
};

/// Free-text parameter beyond the eight standard ones, written as
/// `[appendix.<name>]` in the spec file.
struct AppendixField {
  std::string name;
  std::string text;

  friend bool operator==(const AppendixField&, const AppendixField&) = default;
};

/// A translation specification. Purpose, audience and style/register/tone
/// are essential; everything else is optional and may be left empty.
struct SpecDocument {
  std::string spec_id;
  std::string created_at;

  std::string purpose;
  std::string audience;
  std::string style_register_tone;
  std::string terminology;
  std::vector<GlossaryEntry> glossary;
  std::string domain_legal;
  std::string cultural_adaptation;
  std::string length_formatting;
  std::string localization;
  std::vector<AppendixField> appendix;

  friend bool operator==(const SpecDocument&, const SpecDocument&) = default;
};

struct SpecValidationReport {
  bool valid = false;
  std::vector<std::string> missing_essential;
  std::vector<std::string> warnings;
};

/// Section names as they appear in spec files, in canonical order.
inline constexpr std::string_view kPurpose = "purpose";
inline constexpr std::string_view kAudience = "audience";
inline constexpr std::string_view kStyle = "style";
inline constexpr std::string_view kTerminology = "terminology";
inline constexpr std::string_view kDomainLegal = "domain_legal";
inline constexpr std::string_view kCultural = "cultural";
inline constexpr std::string_view kLengthFormat = "length_format";
inline constexpr std::string_view kLocalization = "localization";

SpecValidationReport validate_spec(const SpecDocument& spec);

/// Content hash over the canonicalized parameters (trimmed, LF line endings,
/// fixed field order, glossary sorted by term). spec_id and created_at are
/// identity metadata and do not participate.
std::string spec_fingerprint(const SpecDocument& spec);

/// Parses the sectioned spec file format. Throws ParseError with the line
/// and section on malformed input.
SpecDocument parse_spec(std::string_view content);
SpecDocument load_spec(const std::string& path);

/// Canonical serialization; parse_spec(serialize_spec(s)) == s for specs
/// whose fields are already trimmed.
std::string serialize_spec(const SpecDocument& spec);

}  // namespace specmt::spec
