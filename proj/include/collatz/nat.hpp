#pragma once

#include <compare>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace collatz {

using u128 = unsigned __int128;

inline constexpr u128 u128_max = ~u128{0};

/// Base class for every anomaly the library reports. `where()` is the
/// starting value whose computation failed.
class collatz_error : public std::runtime_error {
public:
    collatz_error(const std::string& what, u128 where) : std::runtime_error(what), where_(where) {}
    [[nodiscard]] u128 where() const noexcept { return where_; }

private:
    u128 where_;
};

class overflow_error : public collatz_error {
public:
    using collatz_error::collatz_error;
};

class budget_exhausted_error : public collatz_error {
public:
    using collatz_error::collatz_error;
};

std::string to_string(u128 v);

// Checked primitives. They never wrap: on overflow they return false and leave
// `out` untouched.
namespace detail {

[[nodiscard]] constexpr bool checked_mul(u128 a, u128 b, u128& out) noexcept {
    return !__builtin_mul_overflow(a, b, &out);
}

[[nodiscard]] constexpr bool checked_add(u128 a, u128 b, u128& out) noexcept {
    return !__builtin_add_overflow(a, b, &out);
}

/// 3n+1, or false if it does not fit in 128 bits.
[[nodiscard]] constexpr bool triple_plus_one(u128 n, u128& out) noexcept {
    if (n > (u128_max - 1) / 3) return false;
    out = 3 * n + 1;
    return true;
}

} // namespace detail

/// A positive integer with 128-bit magnitude. Zero is not representable.
class Nat {
public:
    constexpr explicit Nat(u128 v) : value_(v) {
        if (v == 0) throw std::domain_error("Nat must be a positive integer");
    }
    template <std::unsigned_integral T>
    constexpr explicit Nat(T v) : Nat(static_cast<u128>(v)) {}
    template <std::signed_integral T>
    constexpr explicit Nat(T v) : Nat(checked_from_signed(v)) {}

    [[nodiscard]] constexpr u128 value() const noexcept { return value_; }
    [[nodiscard]] constexpr bool is_odd() const noexcept { return (value_ & 1u) != 0; }
    [[nodiscard]] constexpr bool is_even() const noexcept { return !is_odd(); }

    /// Throws overflow_error instead of wrapping.
    [[nodiscard]] constexpr Nat triple_plus_one() const {
        u128 out = 0;
        if (!detail::triple_plus_one(value_, out)) {
            throw overflow_error("3n+1 overflows 128 bits for n=" + to_string(value_), value_);
        }
        return Nat{out};
    }

    /// Exact halving. Precondition: even.
    [[nodiscard]] constexpr Nat half() const {
        if (is_odd()) throw std::domain_error("half() of an odd Nat");
        return Nat{value_ >> 1};
    }

    [[nodiscard]] std::string str() const { return to_string(value_); }

    friend constexpr bool operator==(Nat, Nat) = default;
    friend constexpr auto operator<=>(Nat a, Nat b) { return a.value_ <=> b.value_; }

private:
    template <std::signed_integral T>
    static constexpr u128 checked_from_signed(T v) {
        if (v <= 0) throw std::domain_error("Nat must be a positive integer");
        return static_cast<u128>(v);
    }

    u128 value_;
};

inline std::string to_string(u128 v) {
    if (v == 0) return "0";
    char buf[40];
    int pos = 40;
    while (v != 0) {
        buf[--pos] = static_cast<char>('0' + static_cast<int>(v % 10));
        v /= 10;
    }
    return std::string(buf + pos, buf + 40);
}

/// Strict decimal parse: digits only, no sign, no whitespace, no empty input,
/// and the value must fit in 128 bits. Returns nullopt on any violation.
[[nodiscard]] inline std::optional<u128> parse_u128(std::string_view text) noexcept {
    if (text.empty()) return std::nullopt;
    u128 v = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        if (!detail::checked_mul(v, 10, v)) return std::nullopt;
        if (!detail::checked_add(v, static_cast<u128>(c - '0'), v)) return std::nullopt;
    }
    return v;
}

/// Like parse_u128, but also rejects zero.
[[nodiscard]] inline std::optional<Nat> parse_nat(std::string_view text) noexcept {
    auto v = parse_u128(text);
    if (!v || *v == 0) return std::nullopt;
    return Nat{*v};
}

} // namespace collatz
