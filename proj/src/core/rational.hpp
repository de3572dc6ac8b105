#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "core/errors.hpp"

namespace mhla {

// Exact rational arithmetic for energy bookkeeping. Cycle counts stay in
// integers; energies are rationals so reports are reproducible bit for bit.
class Rat {
 public:
  constexpr Rat() : num_(0), den_(1) {}
  Rat(std::int64_t n) : num_(n), den_(1) {}  // NOLINT: implicit on purpose
  Rat(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  static Rat from_u64(std::uint64_t v) {
    if (v > static_cast<std::uint64_t>(INT64_MAX)) throw InternalError("rational overflow");
    return Rat(static_cast<std::int64_t>(v));
  }

  // Parses a plain decimal literal ("10", "-0.5", "1.25"). Exponent forms are
  // rejected; platform files carry energies as plain decimals.
  static Rat from_decimal_string(const std::string& text) {
    std::size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      neg = text[i] == '-';
      ++i;
    }
    std::int64_t mantissa = 0;
    std::int64_t scale = 1;
    bool saw_digit = false, saw_dot = false;
    for (; i < text.size(); ++i) {
      char c = text[i];
      if (c == '.') {
        if (saw_dot) throw InputError("bad decimal literal: " + text);
        saw_dot = true;
        continue;
      }
      if (c < '0' || c > '9') throw InputError("unsupported decimal literal: " + text);
      saw_digit = true;
      mantissa = checked_mul(mantissa, 10);
      mantissa = checked_add(mantissa, c - '0');
      if (saw_dot) scale = checked_mul(scale, 10);
    }
    if (!saw_digit) throw InputError("bad decimal literal: " + text);
    return Rat(neg ? -mantissa : mantissa, scale);
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_negative() const { return num_ < 0; }
  bool is_zero() const { return num_ == 0; }

  friend Rat operator+(const Rat& a, const Rat& b) {
    return Rat::from_i128(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rat operator-(const Rat& a, const Rat& b) {
    return Rat::from_i128(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rat operator*(const Rat& a, const Rat& b) {
    return Rat::from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  Rat& operator+=(const Rat& o) { return *this = *this + o; }
  Rat& operator-=(const Rat& o) { return *this = *this - o; }
  Rat& operator*=(const Rat& o) { return *this = *this * o; }

  friend bool operator==(const Rat& a, const Rat& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
  friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
  friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

  // Exact decimal rendering. Any denominator of the form 2^a*5^b (everything
  // that can arise from decimal inputs) prints as a finite decimal; anything
  // else falls back to "num/den".
  std::string to_decimal_string() const {
    if (den_ == 1) return std::to_string(num_);
    std::int64_t d = den_;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);
    int k = twos > fives ? twos : fives;
    i128 scaled = i128(num_ < 0 ? -num_ : num_);
    for (int i = twos; i < k; ++i) scaled *= 2;
    for (int i = fives; i < k; ++i) scaled *= 5;
    std::string digits = u128_to_string(static_cast<unsigned __int128>(scaled));
    while (static_cast<int>(digits.size()) <= k) digits.insert(digits.begin(), '0');
    digits.insert(digits.size() - k, ".");
    while (digits.back() == '0') digits.pop_back();
    if (digits.back() == '.') digits.pop_back();
    return (num_ < 0 ? "-" : "") + digits;
  }

 private:
  using i128 = __int128;

  static std::string u128_to_string(unsigned __int128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v != 0) {
      s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    return s;
  }

  static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    i128 r = i128(a) + b;
    if (r > INT64_MAX || r < INT64_MIN) throw InternalError("rational overflow");
    return static_cast<std::int64_t>(r);
  }
  static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    i128 r = i128(a) * b;
    if (r > INT64_MAX || r < INT64_MIN) throw InternalError("rational overflow");
    return static_cast<std::int64_t>(r);
  }

  static Rat from_i128(i128 n, i128 d) {
    if (d == 0) throw InternalError("rational with zero denominator");
    if (d < 0) { n = -n; d = -d; }
    i128 g = gcd128(n < 0 ? -n : n, d);
    if (g > 1) { n /= g; d /= g; }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) throw InternalError("rational overflow");
    Rat r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  static i128 gcd128(i128 a, i128 b) {
    while (b != 0) { i128 t = a % b; a = b; b = t; }
    return a == 0 ? 1 : a;
  }

  void normalize() {
    if (den_ == 0) throw InternalError("rational with zero denominator");
    if (den_ < 0) { num_ = -num_; den_ = -den_; }
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) { num_ /= g; den_ /= g; }
  }

  std::int64_t num_;
  std::int64_t den_;
};

}  // namespace mhla
