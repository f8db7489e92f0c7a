#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/lil.hpp"
#include "rwre/regeneration.hpp"
#include "rwre/statistics.hpp"

namespace rwre {

// Dyadic checkpoint grid n = 2^min_exp .. 2^max_exp.
struct CheckpointRange {
    int min_exp = 10;
    int max_exp = 20;

    std::vector<std::int64_t> values() const;
};

struct ExperimentConfig {
    EnvironmentModel model;
    std::optional<std::uint64_t> env_seed;  // pinned environment for fixed_env runs
    std::vector<double> ell;
    std::vector<std::vector<double>> u_list;
    std::int64_t horizon = 100000;
    std::int64_t replicas = 1;
    std::int64_t guard = 1000;
    std::uint64_t master_seed = 1;
    CheckpointRange checkpoints;
    double gamma = 0.5;  // tail diagnostic exponent
    double c = 0.1;      // tail diagnostic rate
    std::string output_dir = "out";
    bool fixed_env = false;
    int workers = 0;  // 0 = hardware concurrency

    void validate() const;  // ConfigError / NotUnitVectorError

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);
    std::string to_json_text() const;

    // Named baseline models (drifted point mass is the analytic reference).
    static EnvironmentModel preset_model(const std::string& name);
};

struct ReplicaSeeds {
    std::uint64_t env_seed = 0;
    std::uint64_t replica_seed = 0;
};

// Pure function of (master_seed, replica index); fresh environment per
// replica unless the config pins one.
ReplicaSeeds derive_replica_seeds(const ExperimentConfig& cfg, std::int64_t replica);

// Runs fn(replica) for every replica on `workers` threads. Work is handed
// out by an atomic counter; fn must only write to its own replica's slot, so
// results never depend on scheduling.
void parallel_replicas(std::int64_t replicas, int workers, const std::function<void(std::int64_t)>& fn);

struct RunManifest {
    std::string version;
    std::string config_json;
    std::vector<ReplicaSeeds> seeds;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;

    std::string to_json_text() const;
};

// Which pipeline stages run_experiment executes and which files it emits.
struct StageSelection {
    bool trajectories = false;  // trajectory_%04d.csv per replica
    bool estimates = false;     // estimates.json + regeneration_report.csv
    bool lil = false;           // lil_curve.csv + lil_envelope.csv

    static StageSelection all() { return {true, true, true}; }
};

struct ExperimentResult {
    RunManifest manifest;
    std::optional<EstimateSummary> summary;
    std::vector<LilCurve> curves;        // per replica, first configured u
    std::optional<DecayTable> envelope;
    std::vector<std::string> written_files;
};

// Full pipeline (simulate -> detect -> estimate -> verify-curves) for every
// replica, merged deterministically in replica order, files written once at
// the end. Output is a pure function of the config for every file except
// manifest.json (which records wall time).
ExperimentResult run_experiment(const ExperimentConfig& cfg, StageSelection stages);

struct AnalyzeResult {
    RegenerationSequence regens;
    std::vector<RegenSample> samples;  // one row per detected block (may be empty)
};

// Detection + extraction on an externally supplied trajectory CSV.
AnalyzeResult analyze_file(const std::string& path, std::span<const double> ell, std::int64_t guard);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rwre
