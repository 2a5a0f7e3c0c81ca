#include "sglab/fixed.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace sglab {

Fixed Fixed::from_double(double value) {
  return Fixed(static_cast<std::int64_t>(std::llround(value * static_cast<double>(kScale))));
}

std::optional<Fixed> Fixed::parse(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    pos = 1;
  }
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int whole_digits = 0;
  int frac_digits = 0;
  constexpr std::int64_t kWholeLimit = std::numeric_limits<std::int64_t>::max() / kScale - 1;
  for (; pos < text.size() && text[pos] != '.'; ++pos) {
    char c = text[pos];
    if (c < '0' || c > '9') return std::nullopt;
    whole = whole * 10 + (c - '0');
    if (whole > kWholeLimit) return std::nullopt;
    ++whole_digits;
  }
  if (pos < text.size()) {
    ++pos;  // '.'
    for (; pos < text.size(); ++pos) {
      char c = text[pos];
      if (c < '0' || c > '9') return std::nullopt;
      if (frac_digits == 9) {
        if (c != '0') return std::nullopt;
        continue;
      }
      frac = frac * 10 + (c - '0');
      ++frac_digits;
    }
    if (frac_digits == 0 && whole_digits == 0) return std::nullopt;
  } else if (whole_digits == 0) {
    return std::nullopt;
  }
  for (int d = frac_digits; d < 9; ++d) frac *= 10;
  std::int64_t raw = whole * kScale + frac;
  return Fixed(negative ? -raw : raw);
}

std::string Fixed::to_string() const {
  std::int64_t magnitude = raw_ < 0 ? -raw_ : raw_;
  std::string out = raw_ < 0 ? "-" : "";
  out += std::to_string(magnitude / kScale);
  std::int64_t frac = magnitude % kScale;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 9 - digits.size(), '0');
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    out += '.';
    out += digits;
  }
  return out;
}

}  // namespace sglab
