// collatz: classify, trace and count natural numbers by the fixed point their
// CR3 or PDCR2 iteration settles on.
//
// Exit codes:
//   0   success
//   1   verify found mismatches
//   2   usage error (bad arguments, n or S out of domain)
//   3   anomaly: step budget exhausted or 128-bit overflow
//   4   checkpoint error
//   130 census interrupted by SIGINT (checkpoint written if requested)

#include <csignal>
#include <iostream>
#include <optional>
#include <stop_token>
#include <string>

#include <CLI11.hpp>

#include "collatz/collatz.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kUsage = 2;
constexpr int kAnomaly = 3;
constexpr int kCheckpoint = 4;
constexpr int kInterrupted = 130;

volatile std::sig_atomic_t g_interrupt = 0;

extern "C" void on_sigint(int) { g_interrupt = 1; }

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

collatz::Nat require_nat(const std::string& text, const char* what) {
    auto n = collatz::parse_nat(text);
    if (!n) {
        throw usage_error(std::string(what) + " must be a positive decimal integer below 2^128 (digits only), got '" +
                          text + "'");
    }
    return *n;
}

std::uint64_t require_census_size(const std::string& text, const char* what) {
    const auto n = require_nat(text, what);
    if (n.value() > UINT64_MAX) throw usage_error(std::string(what) + " exceeds the census range of 2^64-1");
    return static_cast<std::uint64_t>(n.value());
}

// Entries at or above n are never consulted when classifying n.
std::uint64_t cache_bound_for(collatz::Nat n, std::uint64_t requested) {
    if (n.value() >= requested) return requested;
    return std::max<std::uint64_t>(2, static_cast<std::uint64_t>(n.value()) + 1);
}

collatz::MapKind map_from(const std::string& s) { return *collatz::parse_map_kind(s); }

collatz::OutputFormat format_from(const std::string& s) { return *collatz::parse_output_format(s); }

} // namespace

int main(int argc, char** argv) {
    using namespace collatz;

    CLI::App app{"Collatz CR3 / pdCR2 fixed-point classification and census"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    const std::vector<std::string> classifiable{"cr3", "pdcr2"};
    const std::vector<std::string> all_maps{"cr", "cr3", "pdcr", "pdcr2"};
    const std::vector<std::string> formats{"table", "csv", "json"};

    std::string n_text;
    std::string map_text = "cr3";
    std::string path_text = "fast";
    std::string format_text = "table";
    std::string spacing_text = "log";
    std::uint64_t max_steps = StepBudget{}.max_steps;
    CensusConfig cfg;
    std::string checkpoint_file;
    bool resume = false;
    double checkpoint_interval = 10.0;
    std::uint64_t points = 20;

    auto* classify = app.add_subcommand("classify", "Print the class of n");
    classify->add_option("n", n_text, "Positive integer")->required();
    classify->add_option("--map", map_text, "Composite map")->check(CLI::IsMember(classifiable))->capture_default_str();
    classify->add_option("--path", path_text, "Residue lookup or composite-map iteration")
        ->check(CLI::IsMember({"fast", "direct"}))
        ->capture_default_str();
    classify->add_option("--cache-bound", cfg.cache_bound, "Residue cache covers n below this")
        ->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40))
        ->capture_default_str();
    classify->add_option("--max-steps", max_steps, "Step budget")->capture_default_str();

    auto* trace = app.add_subcommand("trace", "Print the trajectory of n");
    trace->add_option("n", n_text, "Positive integer")->required();
    trace->add_option("--map", map_text, "Map to iterate")->check(CLI::IsMember(all_maps))->capture_default_str();
    trace->add_option("--max-steps", max_steps, "Step budget")->capture_default_str();

    auto* census = app.add_subcommand("census", "Count class members over [1, S]");
    census->add_option("S", n_text, "Upper end of the range")->required();
    census->add_option("--map", map_text, "Composite map")->check(CLI::IsMember(classifiable))->capture_default_str();
    census->add_option("--chunk-size", cfg.chunk_size, "Integers per work unit")->check(CLI::PositiveNumber)->capture_default_str();
    census->add_option("--workers", cfg.workers, "Concurrent workers")->check(CLI::PositiveNumber)->capture_default_str();
    census->add_option("--cache-bound", cfg.cache_bound, "Residue cache covers n below this")
        ->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40))
        ->capture_default_str();
    census->add_option("--max-steps", max_steps, "Step budget per integer")->capture_default_str();
    census->add_option("--checkpoint", checkpoint_file, "Checkpoint file to write (and read with --resume)");
    census->add_flag("--resume", resume, "Continue from --checkpoint");
    census->add_option("--checkpoint-interval", checkpoint_interval, "Minimum seconds between checkpoint writes")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    census->add_option("--format", format_text, "Output format")->check(CLI::IsMember(formats))->capture_default_str();

    auto* series = app.add_subcommand("series", "Cumulative class fractions at sample points up to S_max");
    series->add_option("S_max", n_text, "Last sample point")->required();
    series->add_option("--points", points, "Number of sample points")->check(CLI::PositiveNumber)->capture_default_str();
    series->add_option("--spacing", spacing_text, "Sample spacing")->check(CLI::IsMember({"log", "linear"}))->capture_default_str();
    series->add_option("--map", map_text, "Composite map")->check(CLI::IsMember(classifiable))->capture_default_str();
    series->add_option("--chunk-size", cfg.chunk_size, "Integers per work unit")->check(CLI::PositiveNumber)->capture_default_str();
    series->add_option("--workers", cfg.workers, "Concurrent workers")->check(CLI::PositiveNumber)->capture_default_str();
    series->add_option("--cache-bound", cfg.cache_bound, "Residue cache covers n below this")
        ->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40))
        ->capture_default_str();
    series->add_option("--format", format_text, "Output format")->check(CLI::IsMember(formats))->capture_default_str();

    auto* verify = app.add_subcommand("verify", "Compare fast and direct classification over [1, V]");
    verify->add_option("V", n_text, "Upper end of the range")->required();
    verify->add_option("--map", map_text, "Composite map")->check(CLI::IsMember(classifiable))->capture_default_str();
    verify->add_option("--cache-bound", cfg.cache_bound, "Residue cache covers n below this")
        ->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40))
        ->capture_default_str();
    verify->add_option("--max-steps", max_steps, "Step budget")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    cfg.budget.max_steps = max_steps;
    const MapKind map = map_from(map_text);

    try {
        if (classify->parsed()) {
            const Nat n = require_nat(n_text, "n");
            const StepBudget budget{max_steps};
            ClassificationOutcome out = path_text == "direct"
                ? classify_direct(map, n, budget)
                : classify_fast(map, n, build_residue_cache(basis_of(map), cache_bound_for(n, cfg.cache_bound), budget),
                                budget);
            std::cout << render_classification(n, map, out);
            return kOk;
        }
        if (trace->parsed()) {
            const Nat n = require_nat(n_text, "n");
            const Trajectory t = iterate(map, n, StepBudget{max_steps});
            std::cout << render_trajectory(t);
            return (t.terminated == Termination::budget_exhausted || t.terminated == Termination::overflow) ? kAnomaly
                                                                                                              : kOk;
        }
        if (census->parsed()) {
            const std::uint64_t s = require_census_size(n_text, "S");
            if (resume && checkpoint_file.empty()) throw usage_error("--resume requires --checkpoint FILE");
            std::optional<CheckpointOptions> ckpt;
            if (!checkpoint_file.empty()) {
                ckpt = CheckpointOptions{checkpoint_file, resume,
                                         std::chrono::milliseconds(static_cast<long long>(checkpoint_interval * 1000))};
            }
            std::stop_source stop;
            CensusControl control{stop.get_token(), [&](const ClassCounts&) {
                                      if (g_interrupt) stop.request_stop();
                                  }};
            std::signal(SIGINT, on_sigint);
            const CensusResult r = run_census(map, s, cfg, ckpt, control);
            std::cout << render_census(r, format_from(format_text));
            return kOk;
        }
        if (series->parsed()) {
            const std::uint64_t s = require_census_size(n_text, "S_max");
            if (points > s) throw usage_error("--points must not exceed S_max");
            const auto pts = run_series(map, s, points, spacing_text == "linear" ? Spacing::linear : Spacing::log, cfg);
            std::cout << render_series(pts, format_from(format_text));
            return kOk;
        }
        if (verify->parsed()) {
            const std::uint64_t v = require_census_size(n_text, "V");
            const StepBudget budget{max_steps};
            const auto cache = build_residue_cache(basis_of(map), std::min(cfg.cache_bound, std::max<std::uint64_t>(v + 1, 2)), budget);
            const auto mm = verify_range(map, Nat{1u}, Nat{v}, cache, budget);
            std::cout << render_mismatches(map, v, mm);
            return mm.empty() ? kOk : kMismatch;
        }
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const census_interrupted& e) {
        std::cerr << "interrupted: " << e.what() << '\n';
        return kInterrupted;
    } catch (const checkpoint_error& e) {
        std::cerr << "checkpoint error: " << e.what() << '\n';
        return kCheckpoint;
    } catch (const collatz_error& e) {
        std::cerr << "anomaly: " << e.what() << '\n';
        return kAnomaly;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
