#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "collatz/kernel.hpp"

namespace collatz {

/// Fixed point at which the CR3 (1, 2, 4) or PDCR2 (1, 2) iteration settles.
enum class ClassLabel : std::uint8_t { one = 1, two = 2, four = 4 };

[[nodiscard]] constexpr unsigned value(ClassLabel l) noexcept { return static_cast<unsigned>(l); }

/// Labels a composite map can produce, in ascending order.
[[nodiscard]] inline std::vector<ClassLabel> labels_of(MapKind m) {
    if (m == MapKind::cr3) return {ClassLabel::one, ClassLabel::two, ClassLabel::four};
    if (m == MapKind::pdcr2) return {ClassLabel::one, ClassLabel::two};
    throw std::invalid_argument("map " + std::string(name(m)) + " has no fixed-point classes");
}

/// Dense slot for a label: 1 -> 0, 2 -> 1, 4 -> 2.
[[nodiscard]] constexpr std::size_t slot(ClassLabel l) noexcept {
    return l == ClassLabel::one ? 0 : l == ClassLabel::two ? 1 : 2;
}

inline void require_classifiable(MapKind m) {
    if (!has_fixed_points(m)) {
        throw std::invalid_argument("map " + std::string(name(m)) +
                                    " cycles and has no fixed-point classes; use cr3 or pdcr2");
    }
}

enum class ClassifyPath : std::uint8_t { direct, fast };

[[nodiscard]] constexpr std::string_view name(ClassifyPath p) noexcept {
    return p == ClassifyPath::direct ? "direct" : "fast";
}

struct ClassificationOutcome {
    ClassLabel label;
    /// Composite-map applications until the fixed point first repeated,
    /// including the confirming application. Only the direct path knows it;
    /// the fast path works from residues and leaves it empty.
    std::optional<std::uint64_t> composite_steps;
    ClassifyPath path;
};

/// Maps a stopping-time residue to a class. Once the basis trajectory reaches
/// 1 it cycles with period 3 (CR: 1,4,2) or 2 (PDCR: 1,2), so the value seen
/// at multiples of the period is fixed by T mod period.
[[nodiscard]] inline ClassLabel residue_to_label(MapKind m, unsigned residue) {
    require_classifiable(m);
    if (m == MapKind::cr3) {
        switch (residue) {
        case 0: return ClassLabel::one;
        case 1: return ClassLabel::two;
        case 2: return ClassLabel::four;
        default: break;
        }
    } else {
        switch (residue) {
        case 0: return ClassLabel::one;
        case 1: return ClassLabel::two;
        default: break;
        }
    }
    throw std::out_of_range("residue " + std::to_string(residue) + " out of range for " +
                            std::string(name(m)));
}

/// Iterates the composite map itself until an application returns its argument.
[[nodiscard]] inline ClassificationOutcome classify_direct(MapKind m, Nat n, StepBudget budget) {
    require_classifiable(m);
    u128 cur = n.value();
    std::uint64_t steps = 0;
    for (;;) {
        if (steps == budget.max_steps) detail::throw_budget(budget.max_steps, n.value());
        u128 next = 0;
        if (!detail::step(m, cur, next)) detail::throw_overflow(m, cur, n.value());
        ++steps;
        if (next == cur) break;
        cur = next;
    }
    if (cur != 1 && cur != 2 && cur != 4) {
        throw std::logic_error("composite map settled on unexpected fixed point " + to_string(cur));
    }
    return {static_cast<ClassLabel>(static_cast<std::uint8_t>(cur)), steps, ClassifyPath::direct};
}

class ResidueCache;
[[nodiscard]] inline ResidueCache build_residue_cache(Basis basis, std::uint64_t bound, StepBudget budget);

/// Packed 2-bit table of stopping-time residues for 1 <= n < bound.
/// Immutable once built; share it read-only between workers.
class ResidueCache {
public:
    [[nodiscard]] Basis basis() const noexcept { return basis_; }
    [[nodiscard]] std::uint64_t bound() const noexcept { return bound_; }
    [[nodiscard]] bool contains(u128 n) const noexcept { return n >= 1 && n < bound_; }

    /// Residue of n. Precondition: contains(n).
    [[nodiscard]] unsigned entry(std::uint64_t n) const noexcept {
        return static_cast<unsigned>((words_[n >> 5] >> ((n & 31u) * 2)) & 3u);
    }

    [[nodiscard]] std::size_t memory_bytes() const noexcept { return words_.size() * sizeof(std::uint64_t); }

private:
    friend ResidueCache build_residue_cache(Basis, std::uint64_t, StepBudget);

    ResidueCache(Basis b, std::uint64_t bound) : basis_(b), bound_(bound), words_((bound + 31) / 32, 0) {}

    void set(std::uint64_t n, unsigned r) noexcept {
        words_[n >> 5] |= static_cast<std::uint64_t>(r) << ((n & 31u) * 2);
    }

    Basis basis_;
    std::uint64_t bound_;
    std::vector<std::uint64_t> words_;
};

inline constexpr std::uint64_t default_cache_bound = std::uint64_t{1} << 25;

/// Fills entries in ascending order. Each n is iterated (freely above the
/// bound) only until it drops below n, where the residue is already known.
[[nodiscard]] inline ResidueCache build_residue_cache(Basis basis, std::uint64_t bound, StepBudget budget) {
    if (bound < 2) throw std::invalid_argument("residue cache bound must be at least 2");
    ResidueCache cache(basis, bound);
    const unsigned mod = residue_modulus(basis);
    const MapKind m = basis == Basis::cr ? MapKind::cr : MapKind::pdcr;
    // entry(1) = 0 is the zero-initialised state.
    for (std::uint64_t n = 2; n < bound; ++n) {
        if ((n & 1u) == 0) {
            cache.set(n, (1 + cache.entry(n >> 1)) % mod);
            continue;
        }
        u128 cur = n;
        std::uint64_t steps = 0;
        while (cur >= n) {
            if (steps == budget.max_steps) detail::throw_budget(budget.max_steps, n);
            if (!detail::step(basis, cur, cur)) detail::throw_overflow(m, cur, n);
            ++steps;
        }
        cache.set(n, static_cast<unsigned>((steps + cache.entry(static_cast<std::uint64_t>(cur))) % mod));
    }
    return cache;
}

/// Classifies through the stopping-time residue: iterate the basis map until
/// the value is cached, then add the cached residue.
[[nodiscard]] inline ClassificationOutcome classify_fast(MapKind m, Nat n, const ResidueCache& cache,
                                                         StepBudget budget) {
    require_classifiable(m);
    if (basis_of(m) != cache.basis()) {
        throw std::invalid_argument("residue cache basis " + std::string(name(cache.basis())) +
                                    " does not match map " + std::string(name(m)));
    }
    u128 cur = n.value();
    std::uint64_t steps = 0;
    const Basis basis = cache.basis();
    while (!cache.contains(cur)) {
        if (steps == budget.max_steps) detail::throw_budget(budget.max_steps, n.value());
        if (!detail::step(basis, cur, cur)) {
            detail::throw_overflow(basis == Basis::cr ? MapKind::cr : MapKind::pdcr, cur, n.value());
        }
        ++steps;
    }
    const unsigned mod = residue_modulus(basis);
    const unsigned r = static_cast<unsigned>((steps % mod + cache.entry(static_cast<std::uint64_t>(cur))) % mod);
    return {residue_to_label(m, r), std::nullopt, ClassifyPath::fast};
}

struct Mismatch {
    u128 n;
    std::optional<ClassLabel> fast;
    std::optional<ClassLabel> direct;
    /// Anomaly text when a path failed instead of returning a label.
    std::string detail;
};

/// Every n in [lo, hi] on which the fast and direct classifiers disagree,
/// including n where either path raised an anomaly.
[[nodiscard]] inline std::vector<Mismatch> verify_range(MapKind m, Nat lo, Nat hi, const ResidueCache& cache,
                                                        StepBudget budget = {}) {
    require_classifiable(m);
    if (hi < lo) throw std::invalid_argument("verify_range requires lo <= hi");
    std::vector<Mismatch> out;
    for (u128 v = lo.value();; ++v) {
        const Nat n{v};
        Mismatch mm{v, std::nullopt, std::nullopt, {}};
        try {
            mm.fast = classify_fast(m, n, cache, budget).label;
        } catch (const collatz_error& e) {
            mm.detail += std::string("fast: ") + e.what();
        }
        try {
            mm.direct = classify_direct(m, n, budget).label;
        } catch (const collatz_error& e) {
            if (!mm.detail.empty()) mm.detail += "; ";
            mm.detail += std::string("direct: ") + e.what();
        }
        if (!mm.fast || !mm.direct || *mm.fast != *mm.direct) out.push_back(std::move(mm));
        if (v == hi.value()) break;
    }
    return out;
}

} // namespace collatz
