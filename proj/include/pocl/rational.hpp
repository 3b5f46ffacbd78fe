#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pocl {

struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  Rational() = default;
  Rational(int64_t n, int64_t d = 1) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  // Accepts "3", "0.25", "1/10".
  static Rational parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty number");
    auto slash = s.find('/');
    if (slash != std::string::npos)
      return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    auto dot = s.find('.');
    if (dot == std::string::npos) {
      size_t used = 0;
      int64_t v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument("bad number " + s);
      return Rational(v);
    }
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    for (char c : whole + frac)
      if (c < '0' || c > '9') throw std::invalid_argument("bad number " + s);
    int64_t den = 1;
    for (size_t i = 0; i < frac.size(); ++i) den *= 10;
    int64_t w = whole.empty() ? 0 : std::stoll(whole);
    int64_t f = frac.empty() ? 0 : std::stoll(frac);
    return Rational(w * den + f, den);
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    // Exact decimal when the denominator divides a power of ten.
    int64_t d = den, scale = 1;
    int digits = 0;
    while (d % 10 == 0 || d % 2 == 0 || d % 5 == 0) {
      if (d % 10 == 0) d /= 10;
      else if (d % 2 == 0) d /= 2;
      else d /= 5;
      scale *= 10;
      ++digits;
      if (digits > 12) break;
    }
    if (d == 1) {
      int64_t scaled = num * (scale / den);
      bool neg = scaled < 0;
      if (neg) scaled = -scaled;
      std::string w = std::to_string(scaled / scale);
      std::string f = std::to_string(scaled % scale);
      while (static_cast<int>(f.size()) < digits) f = "0" + f;
      while (!f.empty() && f.back() == '0') f.pop_back();
      return (neg ? "-" : "") + w + (f.empty() ? "" : "." + f);
    }
    return std::to_string(num) + "/" + std::to_string(den);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
};

}  // namespace pocl
