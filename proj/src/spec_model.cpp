#include "specmt/spec_model.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <utility>

#include "specmt/error.hpp"
#include "specmt/hash.hpp"
#include "specmt/io.hpp"
#include "specmt/text.hpp"

namespace specmt::spec {
namespace {

std::string canonical(std::string_view s) {
  return std::string(text::trim(text::normalize_line_endings(s)));
}

// Accepted section headers; the long forms are the parameter names as
// usually written in a specification table.
const std::map<std::string, std::string, std::less<>>& section_aliases() {
  static const std::map<std::string, std::string, std::less<>> aliases = {
      {"meta", "meta"},
      {"purpose", "purpose"},
      {"purpose of translation", "purpose"},
      {"audience", "audience"},
      {"target audience", "audience"},
      {"style", "style"},
      {"style, register, and tone", "style"},
      {"style, register and tone", "style"},
      {"terminology", "terminology"},
      {"terminology and reference resources", "terminology"},
      {"domain_legal", "domain_legal"},
      {"domain and legal requirements", "domain_legal"},
      {"cultural", "cultural"},
      {"cultural adaptation", "cultural"},
      {"length_format", "length_format"},
      {"length and formatting", "length_format"},
      {"localization", "localization"},
      {"localization needs", "localization"},
  };
  return aliases;
}

std::string* field_for(SpecDocument& doc, std::string_view section) {
  if (section == kPurpose) return &doc.purpose;
  if (section == kAudience) return &doc.audience;
  if (section == kStyle) return &doc.style_register_tone;
  if (section == kTerminology) return &doc.terminology;
  if (section == kDomainLegal) return &doc.domain_legal;
  if (section == kCultural) return &doc.cultural_adaptation;
  if (section == kLengthFormat) return &doc.length_formatting;
  if (section == kLocalization) return &doc.localization;
  return nullptr;
}

void append_field(std::string& out, std::string_view name, std::string_view value) {
  const std::string v = canonical(value);
  out += name;
  out += ':';
  out += std::to_string(v.size());
  out += ':';
  out += v;
  out += '\n';
}

}  // namespace

SpecValidationReport validate_spec(const SpecDocument& spec) {
  SpecValidationReport report;
  const std::array<std::pair<std::string_view, const std::string*>, 3> essential = {{
      {kPurpose, &spec.purpose},
      {kAudience, &spec.audience},
      {kStyle, &spec.style_register_tone},
  }};
  for (const auto& [name, value] : essential) {
    if (text::is_blank(*value)) report.missing_essential.emplace_back(name);
  }

  std::set<std::string> terms;
  for (const auto& entry : spec.glossary) {
    const std::string term = canonical(entry.term);
    if (term.empty()) report.warnings.push_back("glossary entry with empty source term");
    if (canonical(entry.rendering).empty()) {
      report.warnings.push_back("glossary term '" + term + "' has an empty rendering");
    }
    if (!term.empty() && !terms.insert(term).second) {
      report.warnings.push_back("duplicate glossary term '" + term + "'");
    }
  }
  std::set<std::string> names;
  for (const auto& field : spec.appendix) {
    if (canonical(field.name).empty()) {
      report.warnings.push_back("appendix field with empty name");
    } else if (!names.insert(canonical(field.name)).second) {
      report.warnings.push_back("duplicate appendix field '" + field.name + "'");
    }
  }
  report.valid = report.missing_essential.empty();
  return report;
}

std::string spec_fingerprint(const SpecDocument& spec) {
  std::string buf = "specmt-spec-v1\n";
  append_field(buf, kPurpose, spec.purpose);
  append_field(buf, kAudience, spec.audience);
  append_field(buf, kStyle, spec.style_register_tone);
  append_field(buf, kTerminology, spec.terminology);
  append_field(buf, kDomainLegal, spec.domain_legal);
  append_field(buf, kCultural, spec.cultural_adaptation);
  append_field(buf, kLengthFormat, spec.length_formatting);
  append_field(buf, kLocalization, spec.localization);

  std::vector<std::pair<std::string, std::string>> glossary;
  for (const auto& e : spec.glossary) glossary.emplace_back(canonical(e.term), canonical(e.rendering));
  std::sort(glossary.begin(), glossary.end());
  buf += "glossary:" + std::to_string(glossary.size()) + "\n";
  for (const auto& [term, rendering] : glossary) {
    append_field(buf, "term", term);
    append_field(buf, "rendering", rendering);
  }

  std::vector<std::pair<std::string, std::string>> appendix;
  for (const auto& f : spec.appendix) appendix.emplace_back(canonical(f.name), canonical(f.text));
  std::sort(appendix.begin(), appendix.end());
  buf += "appendix:" + std::to_string(appendix.size()) + "\n";
  for (const auto& [name, value] : appendix) append_field(buf, "appendix." + name, value);

  return sha256_hex(buf);
}

SpecDocument parse_spec(std::string_view content) {
  if (const auto bad = text::first_invalid_utf8(content)) {
    const auto line = 1 + static_cast<std::size_t>(
                              std::count(content.begin(), content.begin() + static_cast<std::ptrdiff_t>(*bad), '\n'));
    throw ParseError(line, "", "invalid UTF-8");
  }
  const auto lines = io::lines(content);

  SpecDocument doc;
  std::string section;            // canonical name of the current section
  std::string appendix_name;      // set when inside [appendix.<name>]
  std::vector<std::string> body;  // free-text lines of the current section
  std::set<std::string> seen;
  std::set<std::string> terms;

  const auto flush = [&] {
    if (section.empty() || section == "meta") {
      body.clear();
      return;
    }
    std::string joined;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (i) joined.push_back('\n');
      joined += body[i];
    }
    joined = canonical(joined);
    if (section == "appendix") {
      doc.appendix.push_back({appendix_name, joined});
    } else {
      *field_for(doc, section) = joined;
    }
    body.clear();
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string_view raw = lines[i];
    const std::string_view trimmed = text::trim(raw);

    if (trimmed.size() >= 2 && trimmed.front() == '[' && trimmed.back() == ']') {
      flush();
      const std::string header(text::trim(trimmed.substr(1, trimmed.size() - 2)));
      const std::string lowered = text::to_lower_ascii(header);
      if (lowered.rfind("appendix.", 0) == 0) {
        appendix_name = std::string(text::trim(header.substr(9)));
        if (appendix_name.empty()) throw ParseError(lineno, header, "appendix section needs a name");
        section = "appendix";
        if (!seen.insert("appendix." + appendix_name).second) {
          throw ParseError(lineno, header, "duplicate section");
        }
        continue;
      }
      const auto& aliases = section_aliases();
      const auto it = aliases.find(lowered);
      if (it == aliases.end()) throw ParseError(lineno, header, "unknown section");
      section = it->second;
      if (!seen.insert(section).second) throw ParseError(lineno, header, "duplicate section");
      continue;
    }

    if (section.empty()) {
      if (!trimmed.empty()) throw ParseError(lineno, "", "text outside of any section");
      continue;
    }

    if (section == "meta") {
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string_view::npos) throw ParseError(lineno, "meta", "expected 'key = value'");
      const std::string key(text::trim(trimmed.substr(0, eq)));
      const std::string value(text::trim(trimmed.substr(eq + 1)));
      if (key == "id") {
        doc.spec_id = value;
      } else if (key == "created_at") {
        doc.created_at = value;
      } else {
        throw ParseError(lineno, "meta", "unknown key '" + key + "'");
      }
      continue;
    }

    if (section == kTerminology && trimmed.find('=') != std::string_view::npos) {
      const auto eq = trimmed.find('=');
      GlossaryEntry entry{std::string(text::trim(trimmed.substr(0, eq))),
                          std::string(text::trim(trimmed.substr(eq + 1)))};
      if (entry.term.empty()) throw ParseError(lineno, "terminology", "glossary entry has an empty term");
      if (entry.rendering.empty()) {
        throw ParseError(lineno, "terminology", "glossary term '" + entry.term + "' has an empty rendering");
      }
      if (!terms.insert(entry.term).second) {
        throw ParseError(lineno, "terminology", "duplicate glossary term '" + entry.term + "'");
      }
      doc.glossary.push_back(std::move(entry));
      continue;
    }
    body.emplace_back(raw);
  }
  flush();
  return doc;
}

SpecDocument load_spec(const std::string& path) { return parse_spec(io::read_file(path)); }

std::string serialize_spec(const SpecDocument& spec) {
  std::string out;
  const auto section = [&out](std::string_view name, std::string_view value) {
    if (!out.empty()) out += '\n';
    out += '[';
    out += name;
    out += "]\n";
    if (!value.empty()) {
      out += value;
      out += '\n';
    }
  };
  if (!spec.spec_id.empty() || !spec.created_at.empty()) {
    section("meta", "");
    if (!spec.spec_id.empty()) out += "id = " + spec.spec_id + "\n";
    if (!spec.created_at.empty()) out += "created_at = " + spec.created_at + "\n";
  }
  section(kPurpose, canonical(spec.purpose));
  section(kAudience, canonical(spec.audience));
  section(kStyle, canonical(spec.style_register_tone));
  if (!canonical(spec.terminology).empty() || !spec.glossary.empty()) {
    section(kTerminology, canonical(spec.terminology));
    for (const auto& e : spec.glossary) out += canonical(e.term) + " = " + canonical(e.rendering) + "\n";
  }
  const std::array<std::pair<std::string_view, const std::string*>, 4> optional = {{
      {kDomainLegal, &spec.domain_legal},
      {kCultural, &spec.cultural_adaptation},
      {kLengthFormat, &spec.length_formatting},
      {kLocalization, &spec.localization},
  }};
  for (const auto& [name, value] : optional) {
    if (!canonical(*value).empty()) section(name, canonical(*value));
  }
  for (const auto& f : spec.appendix) section("appendix." + f.name, canonical(f.text));
  return out;
}

}  // namespace specmt::spec
