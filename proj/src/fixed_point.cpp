#include "specmt/fixed_point.hpp"

#include <cstdlib>

#include "specmt/error.hpp"
#include "specmt/text.hpp"

namespace specmt {

Centi Centi::parse(std::string_view s) {
  const std::string original(s);
  s = text::trim(s);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  const auto dot = s.find('.');
  const std::string_view whole = s.substr(0, dot);
  const std::string_view frac =
      dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  const auto digits = [](std::string_view d) {
    for (char c : d) {
      if (c < '0' || c > '9') return false;
    }
    return true;
  };
  if (whole.empty() || !digits(whole) || !digits(frac) ||
      (dot != std::string_view::npos && frac.empty()) || whole.size() > 15) {
    throw Error(Errc::parse, "not a decimal number: '" + original + "'");
  }
  if (frac.size() > 2) {
    throw Error(Errc::parse, "more than two decimal places: '" + original + "'");
  }
  std::int64_t units = 0;
  for (char c : whole) units = units * 10 + (c - '0');
  units *= 100;
  if (frac.size() >= 1) units += (frac[0] - '0') * 10;
  if (frac.size() == 2) units += frac[1] - '0';
  return Centi(negative ? -units : units);
}

std::string Centi::to_string() const {
  const std::int64_t mag = units_ < 0 ? -units_ : units_;
  std::string out = units_ < 0 ? "-" : "";
  out += std::to_string(mag / 100);
  out.push_back('.');
  out.push_back(static_cast<char>('0' + (mag % 100) / 10));
  out.push_back(static_cast<char>('0' + mag % 10));
  return out;
}

}  // namespace specmt
