// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clicklab/errors.hpp"
#include "clicklab/io.hpp"
#include "clicklab/multiplex.hpp"
#include "clicklab/photon_states.hpp"
#include "clicklab/version.hpp"

namespace clicklab {

/// "kind:key=value,key=value" specification for states and detectors; a bare
/// leading value binds to the kind's primary parameter (e.g. "fock:2").
struct KindSpec {
    std::string kind;
    std::map<std::string, double> params;
    std::string file;  // custom detector / mixture file

    double get(const std::string& key, const std::string& field) const {
        auto it = params.find(key);
        if (it == params.end()) throw ValidationError(field + "." + key + ": missing parameter");
        return it->second;
    }
    double get_or(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
    bool has(const std::string& key) const { return params.count(key) > 0; }
};

inline KindSpec parse_kind_spec(const std::string& text, const std::string& field,
                                const std::string& primary_key) {
    KindSpec spec;
    auto colon = text.find(':');
    spec.kind = text.substr(0, colon);
    if (spec.kind.empty()) throw ValidationError(field + ": empty kind");
    if (colon == std::string::npos) return spec;
    std::string rest = text.substr(colon + 1);
    std::size_t start = 0;
    bool first = true;
    while (start <= rest.size()) {
        auto comma = rest.find(',', start);
        std::string item = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) {
            auto eq = item.find('=');
            if (eq == std::string::npos) {
                if (!first) throw ValidationError(field + ": bare value '" + item + "' must come first");
                try {
                    spec.params[primary_key] = std::stod(item);
                } catch (...) {
                    throw ValidationError(field + ": cannot parse '" + item + "' as a number");
                }
            } else {
                std::string key = item.substr(0, eq);
                std::string value = item.substr(eq + 1);
                if (key.empty()) throw ValidationError(field + ": empty parameter name");
                if (key == "file") {
                    spec.file = value;
                } else {
                    try {
                        spec.params[key] = std::stod(value);
                    } catch (...) {
                        throw ValidationError(field + "." + key + ": cannot parse '" + value + "' as a number");
                    }
                }
            }
        }
        first = false;
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return spec;
}

inline std::string to_string(const KindSpec& spec) {
    std::string out = spec.kind;
    char sep = ':';
    for (const auto& [k, v] : spec.params) {
        out += sep + k + "=" + io_detail::format_double(v);
        sep = ',';
    }
    if (!spec.file.empty()) {
        out += sep;
        out += "file=" + spec.file;
    }
    return out;
}

/// Everything needed to reproduce a simulation run.
struct RunConfig {
    KindSpec state;
    KindSpec detector;
    int detectors = 2;      // N
    int max_outcome = 7;    // K
    std::uint64_t shots = 0;
    std::uint64_t seed = 1;
    int shards = 1;
    bool exact = false;
    std::string out = "counts.csv";

    MultiplexConfig layout() const { return {detectors, max_outcome}; }
};

inline nlohmann::json to_json(const RunConfig& c) {
    return {{"state", to_string(c.state)},   {"detector", to_string(c.detector)},
            {"N", c.detectors},              {"K", c.max_outcome},
            {"shots", c.shots},              {"seed", c.seed},
            {"shards", c.shards},            {"exact", c.exact},
            {"out", c.out}};
}

inline std::uint64_t config_hash(const nlohmann::json& j) { return fnv1a(j.dump()); }

/// Known state kinds: fock, coherent, thermal, heralded, pdc, mixture.
inline void validate_state(const KindSpec& s) {
    const std::string& k = s.kind;
    if (k == "fock") {
        double l = s.get("l", "state");
        if (l < 0 || l != static_cast<long long>(l)) throw ValidationError("state.l: must be a nonnegative integer");
    } else if (k == "coherent") {
        if (s.get("w", "state") < 0) throw ValidationError("state.w: must be >= 0");
    } else if (k == "thermal") {
        if (s.get("mean", "state") < 0) throw ValidationError("state.mean: must be >= 0");
    } else if (k == "heralded" || k == "pdc") {
        double q = s.get("q_sq", "state");
        double he = s.get_or("herald_eff", 1.0);
        if (!(q >= 0 && q < 1)) throw ValidationError("state.q_sq: must lie in [0,1)");
        if (!(he >= 0 && he <= 1)) throw ValidationError("state.herald_eff: must lie in [0,1]");
        if (k == "heralded") {
            double l = s.get("l", "state");
            if (l < 0 || l != static_cast<long long>(l)) throw ValidationError("state.l: must be a nonnegative integer");
        }
    } else if (k == "mixture") {
        if (s.file.empty()) throw ValidationError("state.file: mixture requires file=<csv>");
    } else {
        throw ValidationError("state.kind: unknown kind '" + k +
                              "' (expected fock|coherent|thermal|heralded|pdc|mixture)");
    }
}

inline void validate_detector(const KindSpec& d) {
    const std::string& k = d.kind;
    if (k == "photoelectric" || k == "onoff") {
        double eta = d.get("eta", "detector");
        if (!(eta >= 0 && eta <= 1)) throw ValidationError("detector.eta: must lie in [0,1]");
    } else if (k == "custom") {
        if (d.file.empty()) throw ValidationError("detector.file: custom requires file=<csv>");
    } else {
        throw ValidationError("detector.kind: unknown kind '" + k +
                              "' (expected photoelectric|onoff|custom)");
    }
}

inline void validate(const RunConfig& c) {
    validate_state(c.state);
    validate_detector(c.detector);
    if (c.detectors < 1) throw ValidationError("config.N: must be >= 1");
    if (c.max_outcome < 0) throw ValidationError("config.K: must be >= 0");
    if (c.detector.kind == "onoff" && c.max_outcome != 1)
        throw ValidationError("config.K: on/off detectors fix K = 1");
    if (c.shots < 1) throw ValidationError("config.shots: must be >= 1");
    if (c.shards < 1) throw ValidationError("config.shards: must be >= 1");
}

/// Mixture CSV: header "weight,intensity".
inline ClassicalMixture load_mixture(const std::string& path) {
    auto lines = io_detail::read_lines(path);
    long lineno = 0;
    bool header_seen = false;
    ClassicalMixture mix;
    for (const auto& line : lines) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = io_detail::split_csv(line);
        if (!header_seen) {
            if (cells.size() != 2 || cells[0] != "weight" || cells[1] != "intensity")
                throw ParseError("expected header 'weight,intensity'", lineno);
            header_seen = true;
            continue;
        }
        if (cells.size() != 2) throw ParseError("expected 2 columns", lineno);
        mix.components.push_back(
            {io_detail::parse_double(cells[0], lineno), io_detail::parse_double(cells[1], lineno)});
    }
    validate(mix);
    return mix;
}

}  // namespace clicklab
