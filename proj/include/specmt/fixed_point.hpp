#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace specmt {

/// Decimal fixed-point value counted in hundredths. Error-score arithmetic
/// and per-1,000-word frequencies are carried in this type so that totals
/// are identical on every platform.
class Centi {
 public:
  constexpr Centi() = default;

  static constexpr Centi from_units(std::int64_t hundredths) { return Centi(hundredths); }
  static constexpr Centi from_integer(std::int64_t v) { return Centi(v * 100); }

  /// Accepts "-?digits(.digits{0,2})?". More than two fractional digits is a
  /// parse error rather than a silent rounding.
  static Centi parse(std::string_view s);

  constexpr std::int64_t units() const { return units_; }
  double to_double() const { return static_cast<double>(units_) / 100.0; }

  /// Always two fractional digits, e.g. "3.70", "-0.05", "70.00".
  std::string to_string() const;

  constexpr Centi& operator+=(Centi o) {
    units_ += o.units_;
    return *this;
  }
  friend constexpr Centi operator+(Centi a, Centi b) { return a += b; }
  friend constexpr Centi operator-(Centi a, Centi b) { return Centi(a.units_ - b.units_); }
  friend constexpr Centi operator*(Centi a, std::int64_t k) { return Centi(a.units_ * k); }
  friend constexpr auto operator<=>(Centi, Centi) = default;

 private:
  constexpr explicit Centi(std::int64_t units) : units_(units) {}
  std::int64_t units_ = 0;
};

}  // namespace specmt
