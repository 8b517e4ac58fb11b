// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0
//
// clicklab CLI: simulate balanced multiplexing layouts, analyze click
// statistics for nonclassicality, evaluate the PDC closed-form model, and
// fit detector calibrations.
//
// Exit codes: 0 success, 2 validation error, 3 degenerate statistics
// (every requested criterion undefined), 4 I/O or parse error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clicklab/clicklab.hpp"

namespace {

using namespace clicklab;
using nlohmann::json;

constexpr double pdc_pair_tail_tol = 1e-12;

struct DegenerateRun : DegenerateStatisticsError {
    using DegenerateStatisticsError::DegenerateStatisticsError;
};

PhotonDistribution build_state(const KindSpec& state) {
    if (state.kind == "fock") return fock_distribution(static_cast<int>(state.get("l", "state")));
    if (state.kind == "coherent") return coherent_distribution(state.get("w", "state"));
    if (state.kind == "thermal") return thermal_distribution(state.get("mean", "state"));
    if (state.kind == "heralded")
        return heralded_tmsv_distribution({state.get("q_sq", "state"), state.get_or("herald_eff", 1.0)},
                                          static_cast<int>(state.get("l", "state")));
    throw ValidationError("state.kind: '" + state.kind + "' has no single photon distribution");
}

/// Photon-number mixture of the coherent components; number-diagonal
/// detection cannot distinguish it from the mixture itself.
PhotonDistribution mixture_distribution(const ClassicalMixture& mix) {
    int n_max = 0;
    std::vector<PhotonDistribution> parts;
    for (const auto& comp : mix.components) {
        parts.push_back(coherent_distribution(comp.intensity));
        n_max = std::max(n_max, parts.back().n_max());
    }
    PhotonDistribution out;
    out.probs.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (std::size_t j = 0; j < parts.size(); ++j) {
        const double w = mix.components[j].weight;
        for (int n = 0; n <= parts[j].n_max(); ++n)
            out.probs[static_cast<std::size_t>(n)] += w * parts[j].probs[static_cast<std::size_t>(n)];
        out.tail_mass += w * parts[j].tail_mass;
    }
    return out;
}

ResponseMatrix build_response(const RunConfig& cfg, int n_max) {
    const KindSpec& d = cfg.detector;
    if (d.kind == "photoelectric")
        return ResponseMatrix::photoelectric(d.get("eta", "detector"), cfg.detectors, cfg.max_outcome, n_max);
    if (d.kind == "onoff") return ResponseMatrix::on_off(d.get("eta", "detector"), cfg.detectors, n_max);
    ResponseMatrix resp = custom_response(d.file, cfg.detectors);
    if (resp.n_max() < n_max)
        throw TruncationError("detector.file: response covers n <= " + std::to_string(resp.n_max()) +
                              " but the state needs n <= " + std::to_string(n_max));
    return resp;
}

json sidecar_base(const RunConfig& cfg) {
    json config = to_json(cfg);
    return json{{"config", config},
                {"library_version", std::string(version)},
                {"config_hash", config_hash(config)}};
}

int cmd_simulate(RunConfig cfg) {
    validate(cfg);
    json sidecar = sidecar_base(cfg);

    if (cfg.state.kind == "pdc") {
        TmsvParams params{cfg.state.get("q_sq", "state"), cfg.state.get_or("herald_eff", 1.0)};
        const double nbar = params.q_sq / (1.0 - params.q_sq);
        auto pairs = thermal_distribution(nbar, -1, pdc_pair_tail_tol);
        auto resp = build_response(cfg, pairs.n_max());
        auto joint = sample_pdc_clicks(params, resp, cfg.layout(), cfg.shots, cfg.seed, cfg.shards,
                                       pdc_pair_tail_tol);
        save_counts(joint, cfg.out);
        if (cfg.exact) {
            // joint exact rows (herald, tuple, prob) down to negligible herald mass
            std::string csv = "herald,";
            for (int k = 0; k <= cfg.max_outcome; ++k) csv += "N_" + std::to_string(k) + ",";
            csv += "prob\n";
            double mass = 0.0;
            for (int l = 0; mass < 1.0 - 1e-12 && l < 512; ++l) {
                double pl = herald_probability(params, l);
                mass += pl;
                if (pl < 1e-15) continue;
                auto cond = heralded_tmsv_distribution(params, l, pairs.n_max(), 1.0);
                auto dist = click_distribution_fock_exact(cond, resp, cfg.layout());
                for (const auto& [tuple, p] : dist.probs) {
                    csv += std::to_string(l) + ",";
                    for (int v : tuple) csv += std::to_string(v) + ",";
                    csv += io_detail::format_double(pl * p) + "\n";
                }
            }
            std::string exact_path = cfg.out + ".exact.csv";
            io_detail::write_file(exact_path, csv);
            sidecar["exact_checksum"] = fnv1a(csv);
            sidecar["exact_path"] = exact_path;
        }
    } else if (cfg.state.kind == "mixture") {
        auto mix = load_mixture(cfg.state.file);
        auto dist = mixture_distribution(mix);
        auto resp = build_response(cfg, dist.n_max());
        auto table = sample_clicks(dist, resp, cfg.layout(), cfg.shots, cfg.seed, cfg.shards);
        save_counts(table, cfg.out);
        if (cfg.exact) {
            auto exact = click_distribution_classical(mix, resp, cfg.layout());
            std::string exact_path = cfg.out + ".exact.csv";
            io_detail::write_file(exact_path, to_csv(exact));
            sidecar["exact_checksum"] = checksum(exact);
            sidecar["exact_path"] = exact_path;
        }
    } else {
        auto dist = build_state(cfg.state);
        auto resp = build_response(cfg, dist.n_max());
        auto table = sample_clicks(dist, resp, cfg.layout(), cfg.shots, cfg.seed, cfg.shards);
        save_counts(table, cfg.out);
        if (cfg.exact) {
            auto exact = click_distribution_fock_exact(dist, resp, cfg.layout());
            std::string exact_path = cfg.out + ".exact.csv";
            io_detail::write_file(exact_path, to_csv(exact));
            sidecar["exact_checksum"] = checksum(exact);
            sidecar["exact_path"] = exact_path;
        }
    }

    io_detail::write_file(cfg.out + ".meta.json", sidecar.dump(2) + "\n");
    return 0;
}

struct AnalyzeOptions {
    std::string counts_path;
    std::vector<std::string> criteria{"multi", "bin", "pois"};
    int bootstrap_resamples = 200;
    std::uint64_t seed = 1;
    double z = 3.0;
    std::optional<int> herald;
    std::string out;  // empty = stdout
};

int cmd_analyze(const AnalyzeOptions& opt) {
    CountsTable table;
    std::optional<double> eta_gen;
    json extras;

    switch (sniff_counts_format(opt.counts_path)) {
        case CountsFormat::aggregated:
            table = load_aggregated_counts(opt.counts_path);
            break;
        case CountsFormat::coincidence: {
            auto load = load_coincidences(opt.counts_path);
            table = std::move(load.table);
            json asym = json::array();
            for (const auto& a : load.asymmetry)
                asym.push_back({{"tuple", a.tuple}, {"relative_spread", a.relative_spread}});
            extras["asymmetry"] = std::move(asym);
            break;
        }
        case CountsFormat::heralded: {
            auto joint = load_heralded_counts(opt.counts_path);
            if (!opt.herald)
                throw ValidationError("herald: counts file has a herald column; select --herald <l>");
            auto it = joint.by_herald.find(*opt.herald);
            if (it == joint.by_herald.end())
                throw DegenerateRun("herald: no events with herald outcome " + std::to_string(*opt.herald));
            table = it->second;
            eta_gen = eta_gen_empirical(joint, *opt.herald);
            break;
        }
    }

    const VerdictPolicy policy{opt.z};
    const MultiplexConfig config = table.config;

    struct Row {
        std::string name;
        std::optional<CriterionResult> result;
        std::string error;
    };
    std::vector<Row> rows;
    for (const auto& name : opt.criteria) {
        Row row{name, std::nullopt, {}};
        try {
            if (name == "multi") {
                row.result = q_multi(covariance_matrix(table), policy);
            } else if (name == "bin") {
                row.result = q_bin(table, policy);
            } else if (name == "pois") {
                row.result = q_pois(table, policy);
            } else if (name == "full") {
                row.result = full_matrix_test(table, config, policy);
            } else {
                throw ValidationError("criteria: unknown criterion '" + name +
                                      "' (expected multi|bin|pois|full)");
            }
        } catch (const DegenerateStatisticsError& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }

    // shared-resample bootstrap for the criteria that evaluated
    if (opt.bootstrap_resamples > 0) {
        std::vector<std::function<double(const CountsTable&)>> fns;
        std::vector<std::size_t> which;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!rows[i].result) continue;
            which.push_back(i);
            const std::string name = rows[i].name;
            fns.emplace_back([name, config](const CountsTable& t) {
                if (name == "multi") return q_multi(covariance_matrix(t)).value;
                if (name == "bin") return q_bin(t).value;
                if (name == "pois") return q_pois(t).value;
                return full_matrix_test(t, config).value;
            });
        }
        if (!fns.empty()) {
            auto bands = bootstrap_many(table, fns, opt.bootstrap_resamples, opt.seed);
            for (std::size_t i = 0; i < which.size(); ++i) {
                auto& r = *rows[which[i]].result;
                if (bands[i].resamples_used > 0) apply_uncertainty(r, bands[i].std_error, policy);
                r.degenerate_flagged = bands[i].flagged;
            }
        }
    }

    json criteria_json = json::array();
    std::size_t degenerate_count = 0;
    for (const auto& row : rows) {
        if (row.result) {
            criteria_json.push_back(to_json(*row.result));
        } else {
            ++degenerate_count;
            criteria_json.push_back({{"name", row.name},
                                     {"value", nullptr},
                                     {"degenerate", true},
                                     {"error", row.error}});
        }
    }

    json config_json{{"counts", opt.counts_path},
                     {"criteria", opt.criteria},
                     {"bootstrap", opt.bootstrap_resamples},
                     {"seed", opt.seed},
                     {"z", opt.z},
                     {"N", config.detectors},
                     {"K", config.max_outcome},
                     {"shots", table.shots}};
    if (opt.herald) config_json["herald"] = *opt.herald;

    json report{{"config", config_json},
                {"library_version", std::string(version)},
                {"config_hash", config_hash(config_json)},
                {"criteria", criteria_json}};
    if (eta_gen) report["eta_gen"] = *eta_gen;
    for (auto& [key, value] : extras.items()) report[key] = value;

    std::string text = report.dump(2) + "\n";
    if (opt.out.empty())
        std::cout << text;
    else
        io_detail::write_file(opt.out, text);

    if (!rows.empty() && degenerate_count == rows.size())
        throw DegenerateRun("analyze: every requested criterion is degenerate on this data");
    return 0;
}

int cmd_oracle(const OracleParams& params, int max_l, const std::string& out) {
    validate(params);
    if (max_l < 0) throw ValidationError("oracle.L: must be >= 0");
    json rows = json::array();
    for (int l = 0; l <= max_l; ++l) {
        auto mu = heralded_mu_theory(params, l);
        rows.push_back({{"l", l},
                        {"herald_prob", herald_marginal(params, l)},
                        {"eta_gen", eta_gen_theory(params, l)},
                        {"mu_mean", mu.mean},
                        {"mu_var", mu.variance}});
    }
    std::string text = rows.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        io_detail::write_file(out, text);
    return 0;
}

int cmd_calibrate(const std::string& points_path, const std::string& out) {
    auto points = load_calibration_points(points_path);
    auto fit = fit_quadratic_calibration(points);
    std::string text = to_json(fit).dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        io_detail::write_file(out, text);
    return 0;
}

/// --config JSON overrides flag-provided values; reports whether it pinned K.
void merge_config_file(RunConfig& cfg, const std::string& path, bool& k_set) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("config file: ") + e.what());
    }
    if (j.contains("state")) cfg.state = parse_kind_spec(j["state"].get<std::string>(), "state", "l");
    if (j.contains("detector"))
        cfg.detector = parse_kind_spec(j["detector"].get<std::string>(), "detector", "eta");
    if (j.contains("N")) cfg.detectors = j["N"].get<int>();
    if (j.contains("K")) {
        cfg.max_outcome = j["K"].get<int>();
        k_set = true;
    }
    if (j.contains("shots")) cfg.shots = j["shots"].get<std::uint64_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("shards")) cfg.shards = j["shards"].get<int>();
    if (j.contains("exact")) cfg.exact = j["exact"].get<bool>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clicklab: click-counting simulation and nonclassicality analysis for balanced "
                 "multiplexing layouts"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Sample (or exactly compute) click statistics");
    std::string state_str, detector_str, config_path;
    RunConfig cfg;
    sim->add_option("--state", state_str, "State spec, e.g. fock:1, coherent:w=1.0, thermal:mean=0.5, "
                                          "heralded:q_sq=0.5,herald_eff=0.5,l=2, pdc:q_sq=0.5,herald_eff=0.5, "
                                          "mixture:file=mix.csv");
    sim->add_option("--detector", detector_str,
                    "Detector spec, e.g. photoelectric:eta=0.8, onoff:eta=1, custom:file=resp.csv");
    sim->add_option("-N", cfg.detectors, "Number of detectors / splits");
    auto* k_opt = sim->add_option("-K", cfg.max_outcome, "Maximum outcome index (top bin)");
    sim->add_option("--shots", cfg.shots, "Number of measurement shots");
    sim->add_option("--seed", cfg.seed, "RNG seed");
    sim->add_option("--shards", cfg.shards, "Independent sampling shards");
    sim->add_flag("--exact", cfg.exact, "Also write the exact distribution and its checksum");
    sim->add_option("--out", cfg.out, "Counts CSV output path");
    sim->add_option("--config", config_path, "JSON config file overriding flags");

    // analyze
    auto* ana = app.add_subcommand("analyze", "Evaluate nonclassicality criteria on a counts file");
    AnalyzeOptions aopt;
    std::string criteria_str = "multi,bin,pois";
    int herald_flag = -1;
    ana->add_option("--counts", aopt.counts_path, "Counts CSV (aggregated, coincidence, or heralded)")
        ->required();
    ana->add_option("--criteria", criteria_str, "Comma list from multi,bin,pois,full");
    ana->add_option("--bootstrap", aopt.bootstrap_resamples, "Bootstrap resamples (0 disables)");
    ana->add_option("--seed", aopt.seed, "Bootstrap seed");
    ana->add_option("--z", aopt.z, "Verdict threshold in standard errors");
    auto* herald_opt = ana->add_option("--herald", herald_flag, "Condition on this herald outcome");
    ana->add_option("--out", aopt.out, "Report JSON path (default: stdout)");

    // oracle
    auto* orc = app.add_subcommand("oracle", "Closed-form heralded-PDC expectations");
    OracleParams oracle_params{0.5, 1.0, 1.0, 2};
    int max_l = 5;
    std::string oracle_out;
    orc->add_option("--q-sq", oracle_params.q_sq, "Squeezing magnitude |q|^2");
    orc->add_option("--herald-eff", oracle_params.herald_eff, "Heralding detector efficiency");
    orc->add_option("--det-eff", oracle_params.det_eff, "Multiplexed detector efficiency");
    orc->add_option("-N", oracle_params.detectors, "Number of detectors / splits");
    orc->add_option("-L", max_l, "Largest herald outcome to tabulate");
    orc->add_option("--out", oracle_out, "Output path (default: stdout)");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Fit a quadratic energy-to-photon-number calibration");
    std::string points_path, calibrate_out;
    cal->add_option("--points", points_path, "CSV of (energy, n) pairs")->required();
    cal->add_option("--out", calibrate_out, "Output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            bool k_set = k_opt->count() > 0;
            if (!state_str.empty()) cfg.state = parse_kind_spec(state_str, "state", "l");
            if (!detector_str.empty()) cfg.detector = parse_kind_spec(detector_str, "detector", "eta");
            if (!config_path.empty()) merge_config_file(cfg, config_path, k_set);
            if (state_str.empty() && config_path.empty())
                throw ValidationError("state: provide --state or --config");
            if (detector_str.empty() && config_path.empty())
                throw ValidationError("detector: provide --detector or --config");
            // on/off detectors fix K = 1; custom files carry their own K
            if (cfg.detector.kind == "onoff" && !k_set) cfg.max_outcome = 1;
            if (cfg.detector.kind == "custom" && !cfg.detector.file.empty()) {
                auto file_resp = custom_response(cfg.detector.file, std::max(cfg.detectors, 1));
                if (k_set && cfg.max_outcome != file_resp.max_outcome())
                    throw ValidationError("config.K: custom response file has K=" +
                                          std::to_string(file_resp.max_outcome()));
                cfg.max_outcome = file_resp.max_outcome();
            }
            return cmd_simulate(cfg);
        }
        if (ana->parsed()) {
            aopt.criteria.clear();
            std::size_t start = 0;
            while (start <= criteria_str.size()) {
                auto comma = criteria_str.find(',', start);
                std::string item = criteria_str.substr(
                    start, comma == std::string::npos ? std::string::npos : comma - start);
                if (!item.empty()) aopt.criteria.push_back(item);
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            if (aopt.criteria.empty()) throw ValidationError("criteria: empty list");
            if (herald_opt->count() > 0) aopt.herald = herald_flag;
            return cmd_analyze(aopt);
        }
        if (orc->parsed()) return cmd_oracle(oracle_params, max_l, oracle_out);
        if (cal->parsed()) return cmd_calibrate(points_path, calibrate_out);
    } catch (const DegenerateRun& e) {
        std::cerr << "degenerate statistics: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 4;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const DegenerateStatisticsError& e) {
        std::cerr << "degenerate statistics: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
