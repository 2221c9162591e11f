#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "collatz/classifier.hpp"

namespace collatz {

class checkpoint_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// State of a census after a contiguous prefix [1, next_n) has been counted.
struct Checkpoint {
    static constexpr int current_version = 1;

    int format_version = current_version;
    MapKind map = MapKind::cr3;
    std::uint64_t target_s = 0;
    std::uint64_t next_n = 1;
    /// Indexed by slot(label); the PDCR2 checkpoint keeps slot 2 at zero.
    std::array<std::uint64_t, 3> counts{};
    std::uint64_t cache_bound = 0;
    std::string created_at;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// UTC timestamp, ISO-8601 to the second.
[[nodiscard]] inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

[[nodiscard]] inline std::string checkpoint_to_text(const Checkpoint& c) {
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (ClassLabel l : labels_of(c.map)) counts[std::to_string(value(l))] = c.counts[slot(l)];
    nlohmann::ordered_json j;
    j["format_version"] = c.format_version;
    j["map"] = std::string(name(c.map));
    j["target_s"] = c.target_s;
    j["next_n"] = c.next_n;
    j["counts"] = std::move(counts);
    j["cache_bound"] = c.cache_bound;
    j["created_at"] = c.created_at;
    return j.dump(2) + "\n";
}

namespace detail {

template <typename T>
T checkpoint_field(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw checkpoint_error(std::string("checkpoint is missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw checkpoint_error(std::string("checkpoint field '") + key + "' has the wrong type");
    }
}

inline std::uint64_t checkpoint_uint(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it != j.end() && !it->is_number_unsigned()) {
        throw checkpoint_error(std::string("checkpoint field '") + key + "' must be a non-negative integer");
    }
    return checkpoint_field<std::uint64_t>(j, key);
}

} // namespace detail

/// Strict parse: every field required, unknown fields rejected, version must
/// match, and the counts must be consistent with next_n.
[[nodiscard]] inline Checkpoint checkpoint_from_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw checkpoint_error(std::string("checkpoint does not parse: ") + e.what());
    }
    if (!j.is_object()) throw checkpoint_error("checkpoint must be a JSON object");

    static constexpr std::array known{"format_version", "map", "target_s", "next_n", "counts", "cache_bound",
                                      "created_at"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw checkpoint_error("checkpoint has unknown field '" + key + "'");
        }
    }

    Checkpoint c;
    c.format_version = detail::checkpoint_field<int>(j, "format_version");
    if (c.format_version != Checkpoint::current_version) {
        throw checkpoint_error("checkpoint format version " + std::to_string(c.format_version) +
                               " is not supported (expected " + std::to_string(Checkpoint::current_version) + ")");
    }
    const auto map = parse_map_kind(detail::checkpoint_field<std::string>(j, "map"));
    if (!map || !has_fixed_points(*map)) throw checkpoint_error("checkpoint map must be cr3 or pdcr2");
    c.map = *map;
    c.target_s = detail::checkpoint_uint(j, "target_s");
    c.next_n = detail::checkpoint_uint(j, "next_n");
    c.cache_bound = detail::checkpoint_uint(j, "cache_bound");
    c.created_at = detail::checkpoint_field<std::string>(j, "created_at");

    const auto& counts = j.find("counts");
    if (counts == j.end() || !counts->is_object()) throw checkpoint_error("checkpoint field 'counts' must be an object");
    const auto labels = labels_of(c.map);
    if (counts->size() != labels.size()) throw checkpoint_error("checkpoint counts do not match the map's classes");
    for (ClassLabel l : labels) {
        c.counts[slot(l)] = detail::checkpoint_uint(*counts, std::to_string(value(l)).c_str());
    }

    if (c.target_s == 0 || c.next_n == 0 || c.next_n > c.target_s + 1) {
        throw checkpoint_error("checkpoint next_n is outside [1, target_s + 1]");
    }
    if (c.counts[0] + c.counts[1] + c.counts[2] != c.next_n - 1) {
        throw checkpoint_error("checkpoint counts do not sum to next_n - 1");
    }
    return c;
}

/// Writes through a temporary file and a rename, so a crash never leaves a
/// truncated checkpoint behind.
inline void checkpoint_save(const std::filesystem::path& path, const Checkpoint& c) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw checkpoint_error("cannot write checkpoint " + tmp.string());
        out << checkpoint_to_text(c);
        out.flush();
        if (!out) throw checkpoint_error("failed writing checkpoint " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw checkpoint_error("cannot move checkpoint into place: " + ec.message());
}

[[nodiscard]] inline Checkpoint checkpoint_load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw checkpoint_error("cannot open checkpoint " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_text(ss.str());
}

} // namespace collatz
