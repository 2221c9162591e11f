#pragma once

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "collatz/census.hpp"

namespace collatz {

enum class OutputFormat : std::uint8_t { table, csv, json };

[[nodiscard]] inline std::optional<OutputFormat> parse_output_format(std::string_view s) noexcept {
    if (s == "table") return OutputFormat::table;
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    return std::nullopt;
}

// Fractions appear as fixed 6-decimal strings in every format, so csv and
// json carry byte-identical numeric text. json adds the exact ratio.

[[nodiscard]] inline std::string render_census(const CensusResult& r, OutputFormat fmt) {
    const std::string map{name(r.counts.map)};
    const std::uint64_t s = r.s();
    std::ostringstream out;
    switch (fmt) {
    case OutputFormat::csv:
        out << "S,map,class,count,fraction\n";
        for (const auto& sh : r.shares) {
            out << s << ',' << map << ',' << value(sh.label) << ',' << sh.count << ',' << sh.fraction.decimal() << '\n';
        }
        break;
    case OutputFormat::json: {
        nlohmann::ordered_json j;
        j["S"] = s;
        j["map"] = map;
        auto classes = nlohmann::ordered_json::array();
        for (const auto& sh : r.shares) {
            classes.push_back({{"class", value(sh.label)},
                               {"count", sh.count},
                               {"fraction", sh.fraction.decimal()},
                               {"exact", sh.fraction.exact()}});
        }
        j["classes"] = std::move(classes);
        nlohmann::ordered_json meta;
        meta["chunk_size"] = r.info.chunk_size;
        meta["workers"] = r.info.workers;
        meta["cache_bound"] = r.info.cache_bound;
        meta["budget"] = r.info.budget;
        meta["elapsed_seconds"] = r.info.elapsed_seconds;
        meta["resumed_from"] = r.info.resumed_from ? nlohmann::ordered_json(*r.info.resumed_from) : nullptr;
        j["metadata"] = std::move(meta);
        out << j.dump(2) << '\n';
        break;
    }
    case OutputFormat::table: {
        char line[160];
        out << "census map=" << map << " S=" << s << '\n';
        std::snprintf(line, sizeof line, "%-6s %20s %10s  %s\n", "class", "count", "fraction", "exact");
        out << line;
        for (const auto& sh : r.shares) {
            std::snprintf(line, sizeof line, "%-6u %20llu %10s  %s\n", value(sh.label),
                          static_cast<unsigned long long>(sh.count), sh.fraction.decimal().c_str(),
                          sh.fraction.exact().c_str());
            out << line;
        }
        std::snprintf(line, sizeof line, "%-6s %20llu\n", "sum", static_cast<unsigned long long>(r.counts.total()));
        out << line;
        std::snprintf(line, sizeof line, "engine: chunk_size=%llu workers=%u cache_bound=%llu budget=%llu elapsed=%.3fs\n",
                      static_cast<unsigned long long>(r.info.chunk_size), r.info.workers,
                      static_cast<unsigned long long>(r.info.cache_bound),
                      static_cast<unsigned long long>(r.info.budget), r.info.elapsed_seconds);
        out << line;
        if (r.info.resumed_from) out << "resumed from n=" << *r.info.resumed_from << '\n';
        break;
    }
    }
    return out.str();
}

[[nodiscard]] inline std::string render_series(const std::vector<SeriesPoint>& points, OutputFormat fmt) {
    std::ostringstream out;
    switch (fmt) {
    case OutputFormat::csv:
        out << "S,class,fraction\n";
        for (const auto& p : points) {
            for (const auto& sh : p.shares) out << p.s << ',' << value(sh.label) << ',' << sh.fraction.decimal() << '\n';
        }
        break;
    case OutputFormat::json: {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& p : points) {
            nlohmann::ordered_json fr = nlohmann::ordered_json::object();
            for (const auto& sh : p.shares) fr[std::to_string(value(sh.label))] = sh.fraction.decimal();
            arr.push_back({{"S", p.s}, {"fractions", std::move(fr)}});
        }
        out << arr.dump(2) << '\n';
        break;
    }
    case OutputFormat::table:
        if (points.empty()) break;
        out << std::string(20 - 1, ' ') << 'S';
        for (const auto& sh : points.front().shares) out << "  lambda=" << value(sh.label);
        out << '\n';
        for (const auto& p : points) {
            char cell[32];
            std::snprintf(cell, sizeof cell, "%20llu", static_cast<unsigned long long>(p.s));
            out << cell;
            for (const auto& sh : p.shares) out << "  " << sh.fraction.decimal();
            out << '\n';
        }
        break;
    }
    return out.str();
}

[[nodiscard]] inline std::string render_classification(Nat n, MapKind m, const ClassificationOutcome& c) {
    std::ostringstream out;
    out << "n=" << n.str() << " map=" << name(m) << " path=" << name(c.path) << " label=" << value(c.label)
        << " composite_steps=" << (c.composite_steps ? std::to_string(*c.composite_steps) : std::string("-")) << '\n';
    return out.str();
}

[[nodiscard]] inline std::string render_trajectory(const Trajectory& t) {
    std::ostringstream out;
    for (std::size_t i = 0; i < t.values.size(); ++i) out << (i ? " " : "") << t.values[i].str();
    out << '\n' << "terminated: " << name(t.terminated) << " after " << t.steps << " step"
        << (t.steps == 1 ? "" : "s") << '\n';
    return out.str();
}

[[nodiscard]] inline std::string render_mismatches(MapKind m, std::uint64_t v, const std::vector<Mismatch>& mm) {
    std::ostringstream out;
    out << "verify map=" << name(m) << " range=[1," << v << "] mismatches=" << mm.size() << '\n';
    auto lbl = [](const std::optional<ClassLabel>& l) { return l ? std::to_string(value(*l)) : std::string("error"); };
    for (const auto& x : mm) {
        out << "  n=" << to_string(x.n) << " fast=" << lbl(x.fast) << " direct=" << lbl(x.direct);
        if (!x.detail.empty()) out << " (" << x.detail << ')';
        out << '\n';
    }
    return out.str();
}

} // namespace collatz
