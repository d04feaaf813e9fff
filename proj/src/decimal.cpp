#include "eewiki/decimal.h"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ee {

using boost::multiprecision::cpp_int;

struct DecimalAccess {
  static cpp_int unscaled(const Decimal& d) {
    cpp_int v(d.digits_);
    return d.negative_ ? cpp_int(-v) : v;
  }

  static Decimal make(const cpp_int& unscaled, int scale) {
    const bool negative = unscaled < 0;
    cpp_int magnitude = negative ? cpp_int(-unscaled) : unscaled;
    return Decimal(magnitude.str(), negative && magnitude != 0, scale);
  }
};

namespace {

cpp_int pow10(int n) {
  cpp_int r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

// Rescales both operands to the larger scale.
std::pair<cpp_int, cpp_int> aligned(const Decimal& a, const Decimal& b, int& scale) {
  scale = std::max(a.scale(), b.scale());
  return {DecimalAccess::unscaled(a) * pow10(scale - a.scale()),
          DecimalAccess::unscaled(b) * pow10(scale - b.scale())};
}

// Integer quotient rounded half away from zero.
cpp_int divide_rounded(const cpp_int& num, const cpp_int& den) {
  const bool negative = (num < 0) != (den < 0);
  cpp_int n = abs(num);
  cpp_int d = abs(den);
  cpp_int q = n / d;
  cpp_int r = n % d;
  if (r * 2 >= d) ++q;
  return negative ? cpp_int(-q) : q;
}

}  // namespace

Decimal::Decimal(std::int64_t value) {
  *this = DecimalAccess::make(cpp_int(value), 0);
}

Decimal::Decimal(std::string digits, bool negative, int scale)
    : digits_(std::move(digits)), negative_(negative), scale_(scale) {}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  int scale = 0;
  bool seen_point = false;
  bool seen_digit = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) ++scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      return std::nullopt;
    }
  }
  if (!seen_digit) return std::nullopt;
  const auto first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? std::string("0") : digits.substr(first);
  return Decimal(digits, negative && digits != "0", scale);
}

std::string Decimal::to_string() const {
  std::string magnitude = digits_;
  if (scale_ > 0) {
    if (static_cast<int>(magnitude.size()) <= scale_) {
      magnitude.insert(0, static_cast<std::size_t>(scale_) + 1 - magnitude.size(), '0');
    }
    magnitude.insert(magnitude.size() - static_cast<std::size_t>(scale_), 1, '.');
  }
  return negative_ ? "-" + magnitude : magnitude;
}

bool Decimal::is_integer() const {
  const Decimal n = normalized();
  return n.scale_ == 0;
}

std::optional<std::int64_t> Decimal::to_int64() const {
  const Decimal n = normalized();
  if (n.scale_ != 0) return std::nullopt;
  const cpp_int v = DecimalAccess::unscaled(n);
  if (v > cpp_int(std::numeric_limits<std::int64_t>::max()) ||
      v < cpp_int(std::numeric_limits<std::int64_t>::min())) {
    return std::nullopt;
  }
  return static_cast<std::int64_t>(v);
}

Decimal Decimal::normalized() const {
  if (digits_ == "0") return Decimal();
  std::string digits = digits_;
  int scale = scale_;
  while (scale > 0 && digits.size() > 1 && digits.back() == '0') {
    digits.pop_back();
    --scale;
  }
  return Decimal(digits, negative_, scale);
}

Decimal Decimal::rounded(int places) const {
  if (places < 0) throw std::invalid_argument("negative rounding places");
  const cpp_int u = DecimalAccess::unscaled(*this);
  if (places >= scale_) return DecimalAccess::make(u * pow10(places - scale_), places);
  return DecimalAccess::make(divide_rounded(u, pow10(scale_ - places)), places);
}

Decimal operator+(const Decimal& a, const Decimal& b) {
  int scale = 0;
  auto [x, y] = aligned(a, b, scale);
  return DecimalAccess::make(x + y, scale);
}

Decimal operator-(const Decimal& a, const Decimal& b) {
  int scale = 0;
  auto [x, y] = aligned(a, b, scale);
  return DecimalAccess::make(x - y, scale);
}

Decimal operator*(const Decimal& a, const Decimal& b) {
  return DecimalAccess::make(DecimalAccess::unscaled(a) * DecimalAccess::unscaled(b),
                             a.scale() + b.scale());
}

Decimal Decimal::divide(const Decimal& a, const Decimal& b) {
  if (b.is_zero()) throw std::domain_error("division by zero");
  // a/b = (ua * 10^sb) / (ub * 10^sa)
  cpp_int num = DecimalAccess::unscaled(a) * pow10(b.scale());
  cpp_int den = DecimalAccess::unscaled(b) * pow10(a.scale());
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const cpp_int g = gcd(abs(num), den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  cpp_int rest = den;
  int twos = 0;
  int fives = 0;
  while (rest % 2 == 0) {
    rest /= 2;
    ++twos;
  }
  while (rest % 5 == 0) {
    rest /= 5;
    ++fives;
  }
  if (rest == 1) {
    const int scale = std::max(twos, fives);
    return DecimalAccess::make(num * (pow10(scale) / den), scale);
  }
  return DecimalAccess::make(divide_rounded(num * pow10(kDivisionScale), den), kDivisionScale);
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  int scale = 0;
  auto [x, y] = aligned(a, b, scale);
  if (x < y) return std::strong_ordering::less;
  if (x > y) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::size_t Decimal::hash() const {
  return std::hash<std::string>{}(normalized().to_string());
}

}  // namespace ee
