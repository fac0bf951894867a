// runner.hpp — configuration ingestion (JSON schema v1), sweep orchestration
// over a worker pool, CSV/JSON persistence, plot-data emission, and the
// `verify` oracle harness.
#pragma once

#include "entropix/asymptotics.hpp"
#include "entropix/chain.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace entropix::runner {

struct RunConfig {
    int schema = 1;
    std::string task; // functional | limit | scattering | flux | rates | verify | converge
    ChainSpec chain = ChainSpec::constant(1.0, 0.0, 1.0, 2.0);

    std::string kind = "ES"; // functional/converge: ES | EP | EINF | FCS | GC
    double p = 2.0;          // EP order, may be inf
    double s = 0.0;          // GC relaxation time

    std::vector<double> alpha_grid;
    std::vector<double> t_grid;
    std::vector<double> p_grid;
    std::vector<double> theta_grid;
    std::vector<double> E_grid;

    std::optional<Interval> interval;
    std::optional<int> M;
    asymptotics::MRule m_rule;
    bool use_m_rule = false;

    double quad_tol = 1e-9;
    double oracle_tol = 1e-9;
    std::vector<int> verify_sizes = {4, 6, 8};
    std::string rate_kind = "FCS"; // FCS | ES_GC | both

    std::string out_dir = ".";
    std::string stem = "entropix";
    std::string plot_style; // emit plot data when nonempty: functional | convergence | scattering | all
    int threads = 1;

    nlohmann::json to_json() const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json metadata;

    std::string to_csv() const;
};

struct RunOutcome {
    ResultTable table;
    bool verification_passed = true;
    nlohmann::json failures = nlohmann::json::array();
    std::vector<std::string> written_files;
};

// Executes the task and persists <stem>.csv + <stem>.meta.json (+ plot data
// when requested) under config.out_dir. Deterministic for a fixed config and
// code version: worker results are gathered by grid index.
RunOutcome run(const RunConfig& config);

// plain-text plot columns + a one-line caption sidecar; returns written paths
std::vector<std::string> emit_plotdata(const ResultTable& table, const std::string& style,
                                       const std::string& path_stem);

// interval actually used by finite-volume tasks (explicit, M, or the causality
// M-rule applied to the largest time in the grids)
Interval resolve_interval(const RunConfig& config);

} // namespace entropix::runner
