#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sglab {

/// Signed fixed-point number with nine decimal places.
///
/// Couplings, fields and energies are stored in this form so that +-1
/// instances have exact integer energies and perturbed couplings keep a
/// documented 1e-9 resolution. Addition, subtraction and sign flips are
/// exact; conversion to double is only used for Boltzmann factors.
class Fixed {
 public:
  static constexpr std::int64_t kScale = 1'000'000'000;

  constexpr Fixed() = default;

  static constexpr Fixed from_raw(std::int64_t raw) { return Fixed(raw); }
  static constexpr Fixed from_int(std::int64_t value) { return Fixed(value * kScale); }
  /// Rounds to the nearest representable value.
  static Fixed from_double(double value);
  /// Parses an exact decimal such as "-1", "0.05" or "+1.000000125".
  /// Returns nullopt on malformed text or more than nine fractional digits.
  static std::optional<Fixed> parse(std::string_view text);

  constexpr std::int64_t raw() const { return raw_; }
  double to_double() const { return static_cast<double>(raw_) / static_cast<double>(kScale); }
  constexpr bool is_integer() const { return raw_ % kScale == 0; }
  /// Shortest exact decimal rendering; round-trips through parse().
  std::string to_string() const;

  constexpr Fixed operator-() const { return Fixed(-raw_); }
  constexpr Fixed& operator+=(Fixed o) { raw_ += o.raw_; return *this; }
  constexpr Fixed& operator-=(Fixed o) { raw_ -= o.raw_; return *this; }
  friend constexpr Fixed operator+(Fixed a, Fixed b) { return a += b; }
  friend constexpr Fixed operator-(Fixed a, Fixed b) { return a -= b; }
  friend constexpr Fixed operator*(Fixed a, std::int64_t k) { return Fixed(a.raw_ * k); }
  friend constexpr Fixed operator*(std::int64_t k, Fixed a) { return Fixed(a.raw_ * k); }
  friend constexpr auto operator<=>(Fixed, Fixed) = default;

 private:
  constexpr explicit Fixed(std::int64_t raw) : raw_(raw) {}
  std::int64_t raw_ = 0;
};

/// Energies share the coupling representation.
using Energy = Fixed;

}  // namespace sglab
