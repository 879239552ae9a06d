#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tollcast {

/// Non-negative USD amount held as integer cents.
class Money {
 public:
  constexpr Money() = default;

  static constexpr Money cents(std::int64_t c) {
    if (c < 0) throw std::invalid_argument("money cannot be negative");
    return Money{c};
  }

  constexpr std::int64_t in_cents() const { return cents_; }
  /// Lossy; only for metric and report boundaries.
  constexpr double dollars() const { return static_cast<double>(cents_) / 100.0; }

  std::string str() const;

  constexpr Money operator+(Money o) const { return Money{cents_ + o.cents_}; }
  constexpr Money operator-(Money o) const { return cents(cents_ - o.cents_); }
  constexpr auto operator<=>(const Money&) const = default;

 private:
  constexpr explicit Money(std::int64_t c) : cents_(c) {}
  std::int64_t cents_ = 0;
};

}  // namespace tollcast
