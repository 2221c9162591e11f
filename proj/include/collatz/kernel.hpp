#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "collatz/nat.hpp"

namespace collatz {

/// Which recursion is iterated. CR3 is three CR steps; PDCR2 is two PDCR steps.
enum class MapKind : std::uint8_t { cr, cr3, pdcr, pdcr2 };

/// The single-step map whose stopping time drives classification.
enum class Basis : std::uint8_t { cr, pdcr };

[[nodiscard]] constexpr std::string_view name(MapKind m) noexcept {
    switch (m) {
    case MapKind::cr: return "cr";
    case MapKind::cr3: return "cr3";
    case MapKind::pdcr: return "pdcr";
    case MapKind::pdcr2: return "pdcr2";
    }
    return "?";
}

[[nodiscard]] constexpr std::string_view name(Basis b) noexcept {
    return b == Basis::cr ? "cr" : "pdcr";
}

[[nodiscard]] inline std::optional<MapKind> parse_map_kind(std::string_view s) noexcept {
    if (s == "cr") return MapKind::cr;
    if (s == "cr3") return MapKind::cr3;
    if (s == "pdcr") return MapKind::pdcr;
    if (s == "pdcr2") return MapKind::pdcr2;
    return std::nullopt;
}

/// True for the composite maps, which have fixed points rather than a cycle.
[[nodiscard]] constexpr bool has_fixed_points(MapKind m) noexcept {
    return m == MapKind::cr3 || m == MapKind::pdcr2;
}

[[nodiscard]] constexpr Basis basis_of(MapKind m) noexcept {
    return (m == MapKind::cr || m == MapKind::cr3) ? Basis::cr : Basis::pdcr;
}

/// Length of the terminal cycle of the basis map: 1,4,2 for CR and 1,2 for PDCR.
[[nodiscard]] constexpr unsigned residue_modulus(Basis b) noexcept { return b == Basis::cr ? 3u : 2u; }

/// Upper bound on single applications of the chosen map.
struct StepBudget {
    std::uint64_t max_steps = 1'000'000;
};

namespace detail {

[[nodiscard]] constexpr bool cr(u128 n, u128& out) noexcept {
    if (n & 1u) return triple_plus_one(n, out);
    out = n >> 1;
    return true;
}

// For odd n, 3n+1 is even, so the halving is exact. Overflow is judged on
// 3n+1, the same condition as the CR odd branch.
[[nodiscard]] constexpr bool pdcr(u128 n, u128& out) noexcept {
    if (n & 1u) {
        if (!triple_plus_one(n, out)) return false;
        out >>= 1;
        return true;
    }
    out = n >> 1;
    return true;
}

[[nodiscard]] constexpr bool step(Basis b, u128 n, u128& out) noexcept {
    return b == Basis::cr ? cr(n, out) : pdcr(n, out);
}

[[nodiscard]] constexpr bool step(MapKind m, u128 n, u128& out) noexcept {
    switch (m) {
    case MapKind::cr: return cr(n, out);
    case MapKind::pdcr: return pdcr(n, out);
    case MapKind::cr3: return cr(n, out) && cr(out, out) && cr(out, out);
    case MapKind::pdcr2: return pdcr(n, out) && pdcr(out, out);
    }
    return false;
}

[[noreturn]] inline void throw_overflow(MapKind m, u128 at, u128 start) {
    throw overflow_error(std::string(name(m)) + " step overflows 128 bits at " + to_string(at) +
                             " (start " + to_string(start) + ")",
                         start);
}

[[noreturn]] inline void throw_budget(std::uint64_t budget, u128 start) {
    throw budget_exhausted_error("step budget of " + std::to_string(budget) + " exhausted for n=" +
                                     to_string(start),
                                 start);
}

} // namespace detail

[[nodiscard]] inline Nat step(MapKind m, Nat n) {
    u128 out = 0;
    if (!detail::step(m, n.value(), out)) detail::throw_overflow(m, n.value(), n.value());
    return Nat{out};
}

[[nodiscard]] inline Nat cr_step(Nat n) { return step(MapKind::cr, n); }
[[nodiscard]] inline Nat pdcr_step(Nat n) { return step(MapKind::pdcr, n); }
[[nodiscard]] inline Nat cr3_step(Nat n) { return step(MapKind::cr3, n); }
[[nodiscard]] inline Nat pdcr2_step(Nat n) { return step(MapKind::pdcr2, n); }

enum class Termination : std::uint8_t { reached_fixed_point, reached_one, budget_exhausted, overflow };

[[nodiscard]] constexpr std::string_view name(Termination t) noexcept {
    switch (t) {
    case Termination::reached_fixed_point: return "reached_fixed_point";
    case Termination::reached_one: return "reached_one";
    case Termination::budget_exhausted: return "budget_exhausted";
    case Termination::overflow: return "overflow";
    }
    return "?";
}

enum class Recording : std::uint8_t { full, count_only };

struct Trajectory {
    MapKind map;
    Nat start;
    /// Every visited value beginning with `start`; empty in count-only mode.
    std::vector<Nat> values;
    /// Map applications performed.
    std::uint64_t steps = 0;
    Nat last;
    Termination terminated;
};

/// Applies `map` from `start` until a termination condition holds.
///
/// CR and PDCR stop on reaching 1 (they cycle through it). CR3 and PDCR2 stop
/// once an application returns its own argument; the repeated value is
/// recorded, so a fixed start yields {x, x}. Budget exhaustion and overflow
/// are reported through `terminated`, never thrown.
[[nodiscard]] inline Trajectory iterate(MapKind map, Nat start, StepBudget budget,
                                        Recording rec = Recording::full) {
    Trajectory t{map, start, {}, 0, start, Termination::budget_exhausted};
    const bool record = rec == Recording::full;
    if (record) t.values.push_back(start);

    const bool fixed_rule = has_fixed_points(map);
    u128 cur = start.value();
    if (!fixed_rule && cur == 1) {
        t.terminated = Termination::reached_one;
        return t;
    }
    while (t.steps < budget.max_steps) {
        u128 next = 0;
        if (!detail::step(map, cur, next)) {
            t.terminated = Termination::overflow;
            return t;
        }
        ++t.steps;
        t.last = Nat{next};
        if (record) t.values.push_back(t.last);
        if (fixed_rule ? next == cur : next == 1) {
            t.terminated = fixed_rule ? Termination::reached_fixed_point : Termination::reached_one;
            return t;
        }
        cur = next;
    }
    return t;
}

struct StoppingTime {
    Basis basis;
    /// Index of the first 1 in the trajectory.
    std::uint64_t steps;
    /// steps mod 3 (CR) or steps mod 2 (PDCR).
    unsigned residue;
};

/// Total stopping time under the basis map. Throws budget_exhausted_error or
/// overflow_error if 1 is not reached.
[[nodiscard]] inline StoppingTime stopping_time(Basis basis, Nat n, StepBudget budget) {
    const MapKind m = basis == Basis::cr ? MapKind::cr : MapKind::pdcr;
    u128 cur = n.value();
    std::uint64_t steps = 0;
    while (cur != 1) {
        if (steps == budget.max_steps) detail::throw_budget(budget.max_steps, n.value());
        if (!detail::step(basis, cur, cur)) detail::throw_overflow(m, cur, n.value());
        ++steps;
    }
    return {basis, steps, static_cast<unsigned>(steps % residue_modulus(basis))};
}

} // namespace collatz
