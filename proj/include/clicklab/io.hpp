// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clicklab/calibration.hpp"
#include "clicklab/criteria.hpp"
#include "clicklab/detector_response.hpp"
#include "clicklab/errors.hpp"
#include "clicklab/moments.hpp"
#include "clicklab/multiplex.hpp"
#include "clicklab/photon_states.hpp"
#include "clicklab/version.hpp"

namespace clicklab {

namespace io_detail {

/// Shortest round-trip decimal form of a double; CSV output is byte-stable.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = std::strtod(buf, nullptr);
    if (back == v) {
        for (int prec = 1; prec <= 16; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
            if (std::strtod(shorter, nullptr) == v) return shorter;
        }
    }
    return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s, long line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw ParseError("trailing characters in number '" + s + "'", line);
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (...) {
        throw ParseError("malformed number '" + s + "'", line);
    }
}

inline long long parse_int(const std::string& s, long line) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw ParseError("trailing characters in integer '" + s + "'", line);
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (...) {
        throw ParseError("malformed integer '" + s + "'", line);
    }
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// PhotonDistribution CSV: header "n,prob", one row per photon number.

inline std::string to_csv(const PhotonDistribution& dist) {
    std::string out = "n,prob\n";
    for (int n = 0; n <= dist.n_max(); ++n)
        out += std::to_string(n) + "," + io_detail::format_double(dist.probs[static_cast<std::size_t>(n)]) + "\n";
    return out;
}

inline PhotonDistribution photon_distribution_from_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    PhotonDistribution dist;
    dist.probs.clear();
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = io_detail::split_csv(line);
        if (!header_seen) {
            if (cells.size() != 2 || cells[0] != "n" || cells[1] != "prob")
                throw ParseError("expected header 'n,prob'", lineno);
            header_seen = true;
            continue;
        }
        if (cells.size() != 2) throw ParseError("expected 2 columns", lineno);
        long long n = io_detail::parse_int(cells[0], lineno);
        if (n != static_cast<long long>(dist.probs.size()))
            throw ParseError("photon numbers must be consecutive from 0", lineno);
        dist.probs.push_back(io_detail::parse_double(cells[1], lineno));
    }
    if (dist.probs.empty()) throw ParseError("no photon distribution rows", lineno);
    KahanSum s;
    for (double p : dist.probs) s.add(p);
    dist.tail_mass = std::max(0.0, 1.0 - s.value());
    return dist;
}

// ---------------------------------------------------------------------------
// Custom response CSV: corner header cell "k\n" (or "k"), photon-number
// column labels 0..n_max, then one row per outcome k = 0..K with the
// at-detector kernel probabilities.

inline std::string to_csv(const ResponseMatrix& resp) {
    std::string out = "k\\n";
    for (int n = 0; n <= resp.n_max(); ++n) out += "," + std::to_string(n);
    out += "\n";
    for (int k = 0; k <= resp.max_outcome(); ++k) {
        out += std::to_string(k);
        for (int n = 0; n <= resp.n_max(); ++n) out += "," + io_detail::format_double(resp.kernel(k, n));
        out += "\n";
    }
    return out;
}

inline ResponseMatrix response_from_csv_text(const std::string& text, int N) {
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    std::vector<std::vector<double>> rows;
    std::size_t cols = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = io_detail::split_csv(line);
        if (!header_seen) {
            if (cells.empty() || (cells[0] != "k\\n" && cells[0] != "k"))
                throw ParseError("expected header starting with 'k\\n'", lineno);
            cols = cells.size() - 1;
            if (cols == 0) throw ParseError("response header has no photon-number columns", lineno);
            header_seen = true;
            continue;
        }
        if (cells.size() != cols + 1) throw ParseError("expected " + std::to_string(cols + 1) + " columns", lineno);
        long long k = io_detail::parse_int(cells[0], lineno);
        if (k != static_cast<long long>(rows.size()))
            throw ParseError("outcome rows must be consecutive from 0", lineno);
        std::vector<double> row;
        row.reserve(cols);
        for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(io_detail::parse_double(cells[i], lineno));
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw ParseError("response needs at least outcomes 0 and 1", lineno);
    return ResponseMatrix::custom(std::move(rows), N);
}

/// Loads a custom at-detector response for an N-way layout.
inline ResponseMatrix custom_response(const std::string& path, int N = 1) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return response_from_csv_text(ss.str(), N);
}

// ---------------------------------------------------------------------------
// Counts CSV. Canonical (aggregated) form: header "N_0,...,N_K,count".
// Coincidence form: header "k_1,...,k_N,count". Heralded joint form:
// "herald,N_0,...,N_K,count". All are accepted on input; the aggregated form
// is the canonical output.

inline std::string to_csv(const CountsTable& table) {
    std::string out;
    for (int k = 0; k <= table.config.max_outcome; ++k) out += "N_" + std::to_string(k) + ",";
    out += "count\n";
    for (const auto& [tuple, c] : table.counts) {
        for (int v : tuple) out += std::to_string(v) + ",";
        out += std::to_string(c) + "\n";
    }
    return out;
}

inline std::string to_csv(const HeraldedCounts& counts) {
    std::string out = "herald,";
    for (int k = 0; k <= counts.config.max_outcome; ++k) out += "N_" + std::to_string(k) + ",";
    out += "count\n";
    for (const auto& [l, table] : counts.by_herald) {
        for (const auto& [tuple, c] : table.counts) {
            out += std::to_string(l) + ",";
            for (int v : tuple) out += std::to_string(v) + ",";
            out += std::to_string(c) + "\n";
        }
    }
    return out;
}

inline void save_counts(const CountsTable& table, const std::string& path) {
    io_detail::write_file(path, to_csv(table));
}

inline void save_counts(const HeraldedCounts& counts, const std::string& path) {
    io_detail::write_file(path, to_csv(counts));
}

enum class CountsFormat { aggregated, coincidence, heralded };

/// Peeks at the header row to classify a counts CSV.
inline CountsFormat sniff_counts_format(const std::string& path) {
    auto lines = io_detail::read_lines(path);
    for (const auto& line : lines) {
        if (line.empty()) continue;
        auto cells = io_detail::split_csv(line);
        if (cells.empty()) break;
        if (cells[0] == "herald") return CountsFormat::heralded;
        if (cells[0] == "N_0") return CountsFormat::aggregated;
        if (cells[0] == "k_1") return CountsFormat::coincidence;
        break;
    }
    throw ParseError("unrecognized counts header in '" + path + "'", 1);
}

/// Aggregated-form loader; N is recovered from the tuple sums.
inline CountsTable load_aggregated_counts(const std::string& path) {
    auto lines = io_detail::read_lines(path);
    long lineno = 0;
    int K = -1;
    CountsTable table;
    bool header_seen = false;
    int N = -1;
    for (const auto& line : lines) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = io_detail::split_csv(line);
        if (!header_seen) {
            if (cells.size() < 2 || cells.back() != "count")
                throw ParseError("expected aggregated header 'N_0,...,N_K,count'", lineno);
            for (std::size_t i = 0; i + 1 < cells.size(); ++i)
                if (cells[i] != "N_" + std::to_string(i))
                    throw ParseError("expected column 'N_" + std::to_string(i) + "'", lineno);
            K = static_cast<int>(cells.size()) - 2;
            header_seen = true;
            continue;
        }
        if (static_cast<int>(cells.size()) != K + 2)
            throw ParseError("expected " + std::to_string(K + 2) + " columns", lineno);
        OccupationTuple tuple(static_cast<std::size_t>(K) + 1);
        int total = 0;
        for (int k = 0; k <= K; ++k) {
            long long v = io_detail::parse_int(cells[static_cast<std::size_t>(k)], lineno);
            if (v < 0) throw ParseError("negative occupation", lineno);
            tuple[static_cast<std::size_t>(k)] = static_cast<int>(v);
            total += static_cast<int>(v);
        }
        long long c = io_detail::parse_int(cells.back(), lineno);
        if (c < 0) throw ParseError("negative count", lineno);
        if (N < 0) N = total;
        if (total != N) throw ParseError("occupation sums disagree: expected N=" + std::to_string(N), lineno);
        table.counts[tuple] += static_cast<std::uint64_t>(c);
        table.shots += static_cast<std::uint64_t>(c);
    }
    if (!header_seen || N < 0) throw ParseError("no data rows in '" + path + "'", lineno);
    table.config = {N, K};
    return table;
}

/// Coincidence-form loader: rows (k_1, ..., k_N, count) are grouped into
/// occupation tuples; the per-tuple spread of the merged raw counts is
/// reported as a systematic-asymmetry diagnostic.
inline CoincidenceLoad load_coincidences(const std::string& path) {
    auto lines = io_detail::read_lines(path);
    long lineno = 0;
    int N = -1;
    bool header_seen = false;
    std::vector<std::pair<std::vector<int>, std::uint64_t>> rows;
    int max_k = 0;
    for (const auto& line : lines) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = io_detail::split_csv(line);
        if (!header_seen) {
            if (cells.size() < 2 || cells.back() != "count")
                throw ParseError("expected coincidence header 'k_1,...,k_N,count'", lineno);
            for (std::size_t i = 0; i + 1 < cells.size(); ++i)
                if (cells[i] != "k_" + std::to_string(i + 1))
                    throw ParseError("expected column 'k_" + std::to_string(i + 1) + "'", lineno);
            N = static_cast<int>(cells.size()) - 1;
            if (N < 1) throw ParseError("coincidence header needs at least one detector", lineno);
            header_seen = true;
            continue;
        }
        if (static_cast<int>(cells.size()) != N + 1)
            throw ParseError("expected " + std::to_string(N + 1) + " columns", lineno);
        std::vector<int> outcomes(static_cast<std::size_t>(N));
        for (int i = 0; i < N; ++i) {
            long long v = io_detail::parse_int(cells[static_cast<std::size_t>(i)], lineno);
            if (v < 0) throw ParseError("negative outcome", lineno);
            outcomes[static_cast<std::size_t>(i)] = static_cast<int>(v);
            max_k = std::max(max_k, static_cast<int>(v));
        }
        long long c = io_detail::parse_int(cells.back(), lineno);
        if (c < 0) throw ParseError("negative count", lineno);
        rows.emplace_back(std::move(outcomes), static_cast<std::uint64_t>(c));
    }
    if (!header_seen || rows.empty()) throw ParseError("no data rows in '" + path + "'", lineno);

    CoincidenceLoad out;
    out.table.config = {N, max_k};
    std::map<OccupationTuple, std::vector<std::uint64_t>, TupleOrder> merged_raw;
    for (auto& [outcomes, c] : rows) {
        OccupationTuple tuple = occupation_of_outcomes(outcomes, out.table.config);
        out.table.counts[tuple] += c;
        out.table.shots += c;
        merged_raw[tuple].push_back(c);
    }
    for (auto& [tuple, raw] : merged_raw) {
        if (raw.size() < 2) continue;
        std::uint64_t mx = 0, mn = raw.front(), total = 0;
        for (std::uint64_t c : raw) {
            mx = std::max(mx, c);
            mn = std::min(mn, c);
            total += c;
        }
        if (total > 0)
            out.asymmetry.push_back({tuple, static_cast<double>(mx - mn) / static_cast<double>(total)});
    }
    return out;
}

inline HeraldedCounts load_heralded_counts(const std::string& path) {
    auto lines = io_detail::read_lines(path);
    long lineno = 0;
    int K = -1, N = -1;
    bool header_seen = false;
    HeraldedCounts out;
    for (const auto& line : lines) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = io_detail::split_csv(line);
        if (!header_seen) {
            if (cells.size() < 3 || cells[0] != "herald" || cells.back() != "count")
                throw ParseError("expected heralded header 'herald,N_0,...,N_K,count'", lineno);
            for (std::size_t i = 1; i + 1 < cells.size(); ++i)
                if (cells[i] != "N_" + std::to_string(i - 1))
                    throw ParseError("expected column 'N_" + std::to_string(i - 1) + "'", lineno);
            K = static_cast<int>(cells.size()) - 3;
            header_seen = true;
            continue;
        }
        if (static_cast<int>(cells.size()) != K + 3)
            throw ParseError("expected " + std::to_string(K + 3) + " columns", lineno);
        long long herald = io_detail::parse_int(cells[0], lineno);
        if (herald < 0) throw ParseError("negative herald outcome", lineno);
        OccupationTuple tuple(static_cast<std::size_t>(K) + 1);
        int total = 0;
        for (int k = 0; k <= K; ++k) {
            long long v = io_detail::parse_int(cells[static_cast<std::size_t>(k) + 1], lineno);
            if (v < 0) throw ParseError("negative occupation", lineno);
            tuple[static_cast<std::size_t>(k)] = static_cast<int>(v);
            total += static_cast<int>(v);
        }
        long long c = io_detail::parse_int(cells.back(), lineno);
        if (c < 0) throw ParseError("negative count", lineno);
        if (N < 0) N = total;
        if (total != N) throw ParseError("occupation sums disagree: expected N=" + std::to_string(N), lineno);
        auto& slot = out.by_herald[static_cast<int>(herald)];
        slot.config = {N, K};
        slot.counts[tuple] += static_cast<std::uint64_t>(c);
        slot.shots += static_cast<std::uint64_t>(c);
        out.shots += static_cast<std::uint64_t>(c);
    }
    if (!header_seen || N < 0) throw ParseError("no data rows in '" + path + "'", lineno);
    out.config = {N, K};
    return out;
}

// ---------------------------------------------------------------------------
// Exact distribution CSV (diagnostic output of simulate --exact).

inline std::string to_csv(const ClickDistribution& dist) {
    std::string out;
    for (int k = 0; k <= dist.config.max_outcome; ++k) out += "N_" + std::to_string(k) + ",";
    out += "prob\n";
    for (const auto& [tuple, p] : dist.probs) {
        for (int v : tuple) out += std::to_string(v) + ",";
        out += io_detail::format_double(p) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Calibration points CSV: header "energy,n".

inline std::vector<CalPoint> load_calibration_points(const std::string& path) {
    auto lines = io_detail::read_lines(path);
    long lineno = 0;
    bool header_seen = false;
    std::vector<CalPoint> points;
    for (const auto& line : lines) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = io_detail::split_csv(line);
        if (!header_seen) {
            if (cells.size() != 2 || cells[0] != "energy" || cells[1] != "n")
                throw ParseError("expected header 'energy,n'", lineno);
            header_seen = true;
            continue;
        }
        if (cells.size() != 2) throw ParseError("expected 2 columns", lineno);
        points.push_back({io_detail::parse_double(cells[0], lineno), io_detail::parse_double(cells[1], lineno)});
    }
    return points;
}

/// Raw readings: one scalar per line, no header.
inline std::vector<double> load_readings(const std::string& path) {
    auto lines = io_detail::read_lines(path);
    long lineno = 0;
    std::vector<double> values;
    for (const auto& line : lines) {
        ++lineno;
        if (line.empty()) continue;
        values.push_back(io_detail::parse_double(line, lineno));
    }
    return values;
}

// ---------------------------------------------------------------------------
// JSON serialization.

inline nlohmann::json to_json(const MomentMatrix2& m) {
    return {{"scale", m.scale == MomentScale::raw ? "raw" : "scaled"},
            {"K", m.K},
            {"entries", m.entries}};
}

inline nlohmann::json to_json(const WitnessVector& w) {
    return {{"label", to_string(w.label)}, {"components", w.f}};
}

inline nlohmann::json to_json(const CriterionResult& r) {
    nlohmann::json j{{"name", r.name},
                     {"value", r.value},
                     {"std_error", r.std_error},
                     {"verdict", to_string(r.verdict)},
                     {"vector", to_json(r.vector)}};
    double sig = r.significance();
    j["significance"] = std::isfinite(sig) ? nlohmann::json(sig) : nlohmann::json(nullptr);
    if (!r.components.empty()) j["components"] = r.components;
    if (r.degenerate_flagged) j["degenerate_flagged"] = true;
    return j;
}

inline nlohmann::json to_json(const CalibrationFit& fit) {
    return {{"a", fit.a}, {"b", fit.b}, {"c", fit.c}, {"residual_rms", fit.residual_rms}};
}

/// Checksum of an exact distribution: FNV-1a over its canonical CSV form.
inline std::uint64_t checksum(const ClickDistribution& dist) { return fnv1a(to_csv(dist)); }

}  // namespace clicklab
