#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ee {

// Exact signed decimal: magnitude digits scaled by 10^-scale. Arithmetic is
// exact except for non-terminating quotients, which are rounded half away
// from zero at kDivisionScale places.
class Decimal {
 public:
  static constexpr int kDivisionScale = 28;

  Decimal() = default;
  explicit Decimal(std::int64_t value);

  // Accepts [+-]?(digits[.digits*] | .digits). No exponents.
  static std::optional<Decimal> parse(std::string_view text);

  std::string to_string() const;
  int scale() const noexcept { return scale_; }
  bool is_zero() const noexcept { return digits_ == "0"; }
  bool is_negative() const noexcept { return negative_; }
  bool is_integer() const;
  std::optional<std::int64_t> to_int64() const;

  // Same value with trailing fractional zeros removed.
  Decimal normalized() const;
  // Half away from zero; places >= 0. Pads with zeros when places > scale().
  Decimal rounded(int places) const;

  friend Decimal operator+(const Decimal& a, const Decimal& b);
  friend Decimal operator-(const Decimal& a, const Decimal& b);
  friend Decimal operator*(const Decimal& a, const Decimal& b);
  // Precondition: !b.is_zero().
  static Decimal divide(const Decimal& a, const Decimal& b);

  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);
  friend bool operator==(const Decimal& a, const Decimal& b) { return (a <=> b) == 0; }

  std::size_t hash() const;

 private:
  Decimal(std::string digits, bool negative, int scale);
  friend struct DecimalAccess;

  std::string digits_ = "0";  // magnitude, no leading zeros
  bool negative_ = false;     // never true for zero
  int scale_ = 0;
};

}  // namespace ee
