#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "collatz/checkpoint.hpp"
#include "collatz/classifier.hpp"

namespace collatz {

/// Per-class totals over the inclusive range [lo, hi]. The range is empty
/// when hi + 1 == lo.
struct ClassCounts {
    MapKind map = MapKind::cr3;
    std::uint64_t lo = 1;
    std::uint64_t hi = 0;
    /// Indexed by slot(label).
    std::array<std::uint64_t, 3> counts{};

    [[nodiscard]] static ClassCounts empty(MapKind m, std::uint64_t at = 1) { return {m, at, at - 1, {}}; }

    [[nodiscard]] bool is_empty() const noexcept { return hi + 1 == lo; }
    [[nodiscard]] std::uint64_t size() const noexcept { return hi + 1 - lo; }
    [[nodiscard]] std::uint64_t total() const noexcept { return counts[0] + counts[1] + counts[2]; }
    [[nodiscard]] std::uint64_t count(ClassLabel l) const noexcept { return counts[slot(l)]; }

    friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// Sum of two adjacent, disjoint ranges of the same map, in either order.
[[nodiscard]] inline ClassCounts merge(const ClassCounts& a, const ClassCounts& b) {
    if (a.map != b.map) throw std::invalid_argument("cannot merge counts of different maps");
    if (a.is_empty()) return b;
    if (b.is_empty()) return a;
    ClassCounts out{a.map, 0, 0, {}};
    if (a.hi + 1 == b.lo) {
        out.lo = a.lo;
        out.hi = b.hi;
    } else if (b.hi + 1 == a.lo) {
        out.lo = b.lo;
        out.hi = a.hi;
    } else if (a.lo <= b.hi && b.lo <= a.hi) {
        throw std::invalid_argument("cannot merge overlapping ranges");
    } else {
        throw std::invalid_argument("cannot merge non-adjacent ranges");
    }
    for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] = a.counts[i] + b.counts[i];
    return out;
}

/// Counts classes over [lo, hi] with the fast classifier. The first anomaly
/// aborts the chunk; the exception names the offending n.
[[nodiscard]] inline ClassCounts census_chunk(MapKind m, std::uint64_t lo, std::uint64_t hi,
                                              const ResidueCache& cache, StepBudget budget) {
    require_classifiable(m);
    if (lo < 1 || hi < lo) throw std::invalid_argument("census_chunk requires 1 <= lo <= hi");
    ClassCounts c{m, lo, hi, {}};
    for (std::uint64_t n = lo;; ++n) {
        ++c.counts[slot(classify_fast(m, Nat{n}, cache, budget).label)];
        if (n == hi) break;
    }
    return c;
}

/// Same as census_chunk, but every n goes through the composite-map oracle.
[[nodiscard]] inline ClassCounts census_chunk_direct(MapKind m, std::uint64_t lo, std::uint64_t hi,
                                                     StepBudget budget) {
    require_classifiable(m);
    if (lo < 1 || hi < lo) throw std::invalid_argument("census_chunk requires 1 <= lo <= hi");
    ClassCounts c{m, lo, hi, {}};
    for (std::uint64_t n = lo;; ++n) {
        ++c.counts[slot(classify_direct(m, Nat{n}, budget).label)];
        if (n == hi) break;
    }
    return c;
}

/// Reduced rational num/den.
struct Fraction {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    [[nodiscard]] static Fraction of(std::uint64_t num, std::uint64_t den) {
        if (den == 0) throw std::invalid_argument("zero denominator");
        const auto g = std::gcd(num, den);
        return g == 0 ? Fraction{0, 1} : Fraction{num / g, den / g};
    }

    /// Fixed-point rendering, rounded half up.
    [[nodiscard]] std::string decimal(unsigned places = 6) const {
        u128 scale = 1;
        for (unsigned i = 0; i < places; ++i) scale *= 10;
        const u128 q = (static_cast<u128>(num) * scale * 2 + den) / (static_cast<u128>(den) * 2);
        std::string frac = to_string(q % scale);
        if (places == 0) return to_string(q / scale);
        return to_string(q / scale) + "." + std::string(places - frac.size(), '0') + frac;
    }

    [[nodiscard]] std::string exact() const { return std::to_string(num) + "/" + std::to_string(den); }
    [[nodiscard]] double as_double() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Fraction&, const Fraction&) = default;
};

[[nodiscard]] inline Fraction operator+(const Fraction& a, const Fraction& b) {
    const u128 num = static_cast<u128>(a.num) * b.den + static_cast<u128>(b.num) * a.den;
    const u128 den = static_cast<u128>(a.den) * b.den;
    u128 x = num, y = den;
    while (y != 0) {
        const u128 t = x % y;
        x = y;
        y = t;
    }
    return {static_cast<std::uint64_t>(num / x), static_cast<std::uint64_t>(den / x)};
}

struct ClassShare {
    ClassLabel label;
    std::uint64_t count;
    Fraction fraction;

    friend bool operator==(const ClassShare&, const ClassShare&) = default;
};

/// Per-label shares of a [1, S] count.
[[nodiscard]] inline std::vector<ClassShare> shares_of(const ClassCounts& c) {
    std::vector<ClassShare> out;
    for (ClassLabel l : labels_of(c.map)) out.push_back({l, c.count(l), Fraction::of(c.count(l), c.size())});
    return out;
}

struct CensusConfig {
    std::uint64_t chunk_size = std::uint64_t{1} << 16;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t cache_bound = default_cache_bound;
    StepBudget budget{};
    /// The direct path ignores the cache and iterates the composite map.
    ClassifyPath path = ClassifyPath::fast;
};

struct CheckpointOptions {
    std::filesystem::path path;
    bool resume = false;
    std::chrono::milliseconds interval{10'000};
};

/// Cooperative control of a running census. on_progress sees the merged
/// prefix after every wave of chunks.
struct CensusControl {
    std::stop_token stop;
    std::function<void(const ClassCounts&)> on_progress;
};

class census_interrupted : public std::runtime_error {
public:
    census_interrupted(std::uint64_t next_n)
        : std::runtime_error("census interrupted before n=" + std::to_string(next_n)), next_n_(next_n) {}
    [[nodiscard]] std::uint64_t next_n() const noexcept { return next_n_; }

private:
    std::uint64_t next_n_;
};

struct EngineInfo {
    std::uint64_t chunk_size = 0;
    unsigned workers = 0;
    std::uint64_t cache_bound = 0;
    std::uint64_t budget = 0;
    double elapsed_seconds = 0;
    /// First n counted by this invocation when it resumed from a checkpoint.
    std::optional<std::uint64_t> resumed_from;
};

struct CensusResult {
    ClassCounts counts;
    std::vector<ClassShare> shares;
    EngineInfo info;

    [[nodiscard]] std::uint64_t s() const noexcept { return counts.hi; }
};

struct SeriesPoint {
    std::uint64_t s;
    ClassCounts counts;
    std::vector<ClassShare> shares;
};

enum class Spacing : std::uint8_t { log, linear };

namespace detail {

inline void validate_config(MapKind m, const CensusConfig& cfg) {
    require_classifiable(m);
    if (cfg.chunk_size == 0) throw std::invalid_argument("chunk size must be at least 1");
    if (cfg.workers == 0) throw std::invalid_argument("worker count must be at least 1");
    if (cfg.cache_bound < 2) throw std::invalid_argument("cache bound must be at least 2");
}

/// The cache never needs to reach past the census range.
[[nodiscard]] inline std::uint64_t effective_cache_bound(const CensusConfig& cfg, std::uint64_t s) {
    const std::uint64_t wanted = s == UINT64_MAX ? s : s + 1;
    return std::max<std::uint64_t>(2, std::min(cfg.cache_bound, wanted));
}

/// Counts [lo, hi] in fixed-size chunks. Chunks are dispatched in waves of
/// `workers * 4`; each wave is merged in ascending order before `after_wave`
/// sees the running prefix, so the result is independent of scheduling.
/// `after_wave` returns false to stop early.
class ChunkEngine {
public:
    ChunkEngine(MapKind m, const ResidueCache* cache, const CensusConfig& cfg) : map_(m), cache_(cache), cfg_(cfg) {}

    ClassCounts run(ClassCounts prefix, std::uint64_t hi,
                    const std::function<bool(const ClassCounts&)>& after_wave) const {
        std::uint64_t next = prefix.hi + 1;
        const std::uint64_t wave_chunks = std::uint64_t{cfg_.workers} * 4;
        while (next <= hi) {
            const std::uint64_t span = hi - next + 1;
            const std::uint64_t chunks = std::min(wave_chunks, (span - 1) / cfg_.chunk_size + 1);
            auto results = run_wave(next, hi, chunks);
            for (auto& r : results) prefix = merge(prefix, r);
            next = prefix.hi + 1;
            if (!after_wave(prefix)) break;
            if (next == 0) break; // hi == UINT64_MAX
        }
        return prefix;
    }

private:
    [[nodiscard]] ClassCounts count(std::uint64_t lo, std::uint64_t hi) const {
        return cfg_.path == ClassifyPath::fast ? census_chunk(map_, lo, hi, *cache_, cfg_.budget)
                                               : census_chunk_direct(map_, lo, hi, cfg_.budget);
    }

    [[nodiscard]] std::vector<ClassCounts> run_wave(std::uint64_t first, std::uint64_t hi,
                                                    std::uint64_t chunks) const {
        std::vector<ClassCounts> results(chunks);
        std::vector<std::exception_ptr> errors(chunks);
        std::atomic<std::uint64_t> cursor{0};
        std::atomic<bool> failed{false};

        auto worker = [&] {
            for (;;) {
                if (failed.load(std::memory_order_relaxed)) return;
                const std::uint64_t i = cursor.fetch_add(1, std::memory_order_relaxed);
                if (i >= chunks) return;
                const std::uint64_t lo = first + i * cfg_.chunk_size;
                const std::uint64_t top = std::min(hi, lo + (cfg_.chunk_size - 1));
                try {
                    results[i] = count(lo, top);
                } catch (...) {
                    errors[i] = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        };

        const auto nthreads = static_cast<unsigned>(std::min<std::uint64_t>(cfg_.workers, chunks));
        if (nthreads <= 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            pool.reserve(nthreads);
            for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        }
        // Chunks are claimed in ascending order and a claimed chunk always
        // finishes, so the lowest failing chunk is the same on every run.
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
        return results;
    }

    MapKind map_;
    const ResidueCache* cache_;
    CensusConfig cfg_;
};

[[nodiscard]] inline std::optional<ResidueCache> cache_for(MapKind m, const CensusConfig& cfg, std::uint64_t s) {
    if (cfg.path == ClassifyPath::direct) return std::nullopt;
    return build_residue_cache(basis_of(m), effective_cache_bound(cfg, s), cfg.budget);
}

[[nodiscard]] inline EngineInfo engine_info(const CensusConfig& cfg, const std::optional<ResidueCache>& cache) {
    return {cfg.chunk_size, cfg.workers, cache ? cache->bound() : 0, cfg.budget.max_steps, 0, std::nullopt};
}

} // namespace detail

/// Σ_λ(S) for every class λ of `m` over [1, S].
///
/// With a checkpoint, the counted prefix is saved at most once per interval,
/// on interruption, and on completion. A resumed run must match the saved
/// map, target and format version, and yields the same counts as an
/// uninterrupted one.
[[nodiscard]] inline CensusResult run_census(MapKind m, std::uint64_t s, const CensusConfig& cfg,
                                             const std::optional<CheckpointOptions>& checkpoint = std::nullopt,
                                             const CensusControl& control = {}) {
    detail::validate_config(m, cfg);
    if (s < 1) throw std::invalid_argument("census size S must be at least 1");
    const auto t0 = std::chrono::steady_clock::now();

    ClassCounts prefix = ClassCounts::empty(m);
    std::optional<std::uint64_t> resumed_from;
    if (checkpoint && checkpoint->resume) {
        const Checkpoint saved = checkpoint_load(checkpoint->path);
        if (saved.map != m) {
            throw checkpoint_error("checkpoint is for map " + std::string(name(saved.map)) + ", not " +
                                   std::string(name(m)));
        }
        if (saved.target_s != s) {
            throw checkpoint_error("checkpoint targets S=" + std::to_string(saved.target_s) + ", not " +
                                   std::to_string(s));
        }
        prefix.hi = saved.next_n - 1;
        prefix.counts = saved.counts;
        resumed_from = saved.next_n;
    }

    const auto cache = detail::cache_for(m, cfg, s);
    auto save = [&](const ClassCounts& p) {
        if (!checkpoint) return;
        checkpoint_save(checkpoint->path, Checkpoint{Checkpoint::current_version, m, s, p.hi + 1, p.counts,
                                                     cache ? cache->bound() : 0, utc_timestamp()});
    };

    auto last_save = std::chrono::steady_clock::now();
    bool stopped = false;
    const detail::ChunkEngine engine(m, cache ? &*cache : nullptr, cfg);
    prefix = engine.run(prefix, s, [&](const ClassCounts& p) {
        if (control.on_progress) control.on_progress(p);
        const auto now = std::chrono::steady_clock::now();
        if (p.hi < s && control.stop.stop_requested()) {
            stopped = true;
            return false;
        }
        if (checkpoint && now - last_save >= checkpoint->interval) {
            save(p);
            last_save = now;
        }
        return true;
    });
    if (stopped) {
        save(prefix);
        throw census_interrupted(prefix.hi + 1);
    }
    save(prefix);

    if (prefix.total() != s || prefix.lo != 1 || prefix.hi != s) {
        throw std::logic_error("census counts do not sum to S");
    }
    CensusResult r{prefix, shares_of(prefix), detail::engine_info(cfg, cache)};
    r.info.resumed_from = resumed_from;
    r.info.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Sample sizes for a convergence series, strictly increasing and ending at s_max.
[[nodiscard]] inline std::vector<std::uint64_t> sample_points(std::uint64_t s_max, std::uint64_t points,
                                                              Spacing spacing) {
    if (points < 1) throw std::invalid_argument("series needs at least one point");
    if (s_max < points) throw std::invalid_argument("series S_max must be at least the number of points");
    std::vector<std::uint64_t> out;
    out.reserve(points);
    std::uint64_t prev = 0;
    for (std::uint64_t k = 1; k <= points; ++k) {
        std::uint64_t v;
        if (k == points) {
            v = s_max;
        } else if (spacing == Spacing::linear) {
            v = static_cast<std::uint64_t>(static_cast<u128>(k) * s_max / points);
        } else {
            const double e = std::log(static_cast<double>(s_max)) * static_cast<double>(k) / static_cast<double>(points);
            v = static_cast<std::uint64_t>(std::llround(std::exp(e)));
        }
        v = std::max(v, prev + 1);
        v = std::min(v, s_max - (points - k));
        out.push_back(v);
        prev = v;
    }
    return out;
}

/// One ascending pass over [1, s_max], reporting cumulative shares at each
/// sample point.
[[nodiscard]] inline std::vector<SeriesPoint> run_series(MapKind m, std::uint64_t s_max, std::uint64_t points,
                                                         Spacing spacing, const CensusConfig& cfg) {
    detail::validate_config(m, cfg);
    const auto samples = sample_points(s_max, points, spacing);
    const auto cache = detail::cache_for(m, cfg, s_max);
    const detail::ChunkEngine engine(m, cache ? &*cache : nullptr, cfg);

    std::vector<SeriesPoint> out;
    out.reserve(samples.size());
    ClassCounts prefix = ClassCounts::empty(m);
    for (std::uint64_t s : samples) {
        prefix = engine.run(prefix, s, [](const ClassCounts&) { return true; });
        out.push_back({s, prefix, shares_of(prefix)});
    }
    return out;
}

} // namespace collatz
