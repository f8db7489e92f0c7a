#include "rwre/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "rwre/csv.hpp"
#include "rwre/errors.hpp"
#include "rwre/json_io.hpp"
#include "rwre/rng.hpp"

namespace rwre {

std::vector<std::int64_t> CheckpointRange::values() const {
    std::vector<std::int64_t> out;
    for (int e = min_exp; e <= max_exp; ++e) {
        out.push_back(std::int64_t{1} << e);
    }
    return out;
}

void ExperimentConfig::validate() const {
    model.validate();
    require_unit(ell);
    if (static_cast<int>(ell.size()) != model.dimension) {
        throw ConfigError("ell dimension does not match the model");
    }
    if (u_list.empty()) {
        throw ConfigError("u_list must contain at least one direction");
    }
    for (const auto& u : u_list) {
        require_unit(u);
        if (static_cast<int>(u.size()) != model.dimension) {
            throw ConfigError("u dimension does not match the model");
        }
    }
    if (replicas < 1) {
        throw ConfigError("replicas must be >= 1");
    }
    if (horizon < 0 || horizon > kMaxHorizon) {
        throw ConfigError("horizon must lie in [0, 2^40]");
    }
    if (guard < 0) {
        throw ConfigError("guard must be >= 0");
    }
    if (horizon > 0 && guard >= horizon) {
        throw ConfigError("guard must be smaller than the horizon");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw ConfigError("gamma must lie strictly in (0, 1)");
    }
    if (!(c > 0.0)) {
        throw ConfigError("c must be > 0");
    }
    if (checkpoints.min_exp < 1 || checkpoints.min_exp > checkpoints.max_exp ||
        checkpoints.max_exp >= 40) {
        throw ConfigError("checkpoint exponents must satisfy 1 <= min <= max < 40");
    }
    if (workers < 0) {
        throw ConfigError("workers must be >= 0");
    }
    if (output_dir.empty()) {
        throw ConfigError("output_dir must not be empty");
    }
}

EnvironmentModel ExperimentConfig::preset_model(const std::string& name) {
    if (name == "drifted_point_mass") {
        return EnvironmentModel::point_mass(2, 0.1, {0.4, 0.1, 0.25, 0.25});
    }
    if (name == "elliptic_perturbation") {
        return EnvironmentModel::elliptic_perturbation(2, 0.05, {0.4, 0.1, 0.25, 0.25}, 0.5);
    }
    if (name == "two_kernel_mixture") {
        return EnvironmentModel::two_kernel_mixture(2, 0.1, 0.5, {0.45, 0.1, 0.2, 0.25},
                                                    {0.35, 0.1, 0.3, 0.25});
    }
    throw ConfigError("unknown preset \"" + name +
                      "\" (expected drifted_point_mass, elliptic_perturbation, two_kernel_mixture)");
}

namespace {

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["model"] = model_to_json(cfg.model);
    if (cfg.env_seed) j["model"]["env_seed"] = *cfg.env_seed;
    j["ell"] = cfg.ell;
    j["u_list"] = cfg.u_list;
    j["horizon"] = cfg.horizon;
    j["replicas"] = cfg.replicas;
    j["guard"] = cfg.guard;
    j["master_seed"] = cfg.master_seed;
    j["checkpoints"] = {{"min_exp", cfg.checkpoints.min_exp}, {"max_exp", cfg.checkpoints.max_exp}};
    j["gamma"] = cfg.gamma;
    j["c"] = cfg.c;
    j["output_dir"] = cfg.output_dir;
    j["fixed_env"] = cfg.fixed_env;
    j["workers"] = cfg.workers;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    try {
        ExperimentConfig cfg;
        cfg.model = model_from_json(j.at("model"));
        if (j.at("model").contains("env_seed")) {
            cfg.env_seed = j.at("model").at("env_seed").get<std::uint64_t>();
        }
        cfg.ell = j.at("ell").get<std::vector<double>>();
        cfg.u_list = j.at("u_list").get<std::vector<std::vector<double>>>();
        cfg.horizon = j.at("horizon").get<std::int64_t>();
        cfg.replicas = j.at("replicas").get<std::int64_t>();
        cfg.guard = j.at("guard").get<std::int64_t>();
        cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("checkpoints")) {
            cfg.checkpoints.min_exp = j.at("checkpoints").at("min_exp").get<int>();
            cfg.checkpoints.max_exp = j.at("checkpoints").at("max_exp").get<int>();
        }
        if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
        if (j.contains("c")) cfg.c = j.at("c").get<double>();
        if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("fixed_env")) cfg.fixed_env = j.at("fixed_env").get<bool>();
        if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config JSON: ") + e.what());
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config JSON: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const { return config_to_json(*this).dump(2); }

ReplicaSeeds derive_replica_seeds(const ExperimentConfig& cfg, std::int64_t replica) {
    ReplicaSeeds s;
    if (cfg.fixed_env) {
        s.env_seed = cfg.env_seed ? *cfg.env_seed
                                  : derive_key(derive_key(stream_role::env_seed, cfg.master_seed), 0);
    } else {
        s.env_seed = derive_key(derive_key(stream_role::env_seed, cfg.master_seed),
                                static_cast<std::uint64_t>(replica));
    }
    s.replica_seed = derive_key(derive_key(stream_role::walk_seed, cfg.master_seed),
                                static_cast<std::uint64_t>(replica));
    return s;
}

void parallel_replicas(std::int64_t replicas, int workers,
                       const std::function<void(std::int64_t)>& fn) {
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 1;
    }
    const int n_threads = static_cast<int>(std::min<std::int64_t>(workers, replicas));
    if (n_threads <= 1) {
        for (std::int64_t i = 0; i < replicas; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        threads.emplace_back([&]() {
            while (true) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= replicas) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string RunManifest::to_json_text() const {
    nlohmann::json j;
    j["version"] = version;
    j["config"] = nlohmann::json::parse(config_json);
    j["wall_seconds"] = wall_seconds;
    j["warnings"] = warnings;
    nlohmann::json seeds_json = nlohmann::json::array();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        seeds_json.push_back({{"replica", i},
                              {"env_seed", seeds[i].env_seed},
                              {"walk_seed", seeds[i].replica_seed}});
    }
    j["replica_seeds"] = seeds_json;
    return j.dump(2);
}

namespace {

// Associative/commutative per-replica sums over non-first blocks; merged in
// replica order so the reduction is independent of scheduling.
struct BlockMoments {
    std::int64_t n_blocks = 0;
    std::int64_t n_first = 0;
    std::vector<double> sum_dx;      // d
    double sum_dtau = 0.0;
    double sum_dtau2 = 0.0;
    std::vector<double> sum_p2;      // per u, p = dX . u
    std::vector<double> sum_p_dtau;  // per u
    std::vector<double> sum_abs_p3;  // per u

    void init(std::size_t d, std::size_t n_u) {
        sum_dx.assign(d, 0.0);
        sum_p2.assign(n_u, 0.0);
        sum_p_dtau.assign(n_u, 0.0);
        sum_abs_p3.assign(n_u, 0.0);
    }

    void add(const RegenSample& s, std::span<const std::vector<double>> u_list) {
        if (s.first_block) {
            ++n_first;
            return;
        }
        ++n_blocks;
        for (std::size_t i = 0; i < sum_dx.size(); ++i) {
            sum_dx[i] += static_cast<double>(s.delta_x[i]);
        }
        const double dtau = static_cast<double>(s.delta_tau);
        sum_dtau += dtau;
        sum_dtau2 += dtau * dtau;
        for (std::size_t ui = 0; ui < u_list.size(); ++ui) {
            double p = 0.0;
            for (std::size_t i = 0; i < sum_dx.size(); ++i) {
                p += static_cast<double>(s.delta_x[i]) * u_list[ui][i];
            }
            sum_p2[ui] += p * p;
            sum_p_dtau[ui] += p * dtau;
            sum_abs_p3[ui] += std::abs(p * p * p);
        }
    }

    void merge(const BlockMoments& o) {
        n_blocks += o.n_blocks;
        n_first += o.n_first;
        for (std::size_t i = 0; i < sum_dx.size(); ++i) sum_dx[i] += o.sum_dx[i];
        sum_dtau += o.sum_dtau;
        sum_dtau2 += o.sum_dtau2;
        for (std::size_t i = 0; i < sum_p2.size(); ++i) {
            sum_p2[i] += o.sum_p2[i];
            sum_p_dtau[i] += o.sum_p_dtau[i];
            sum_abs_p3[i] += o.sum_abs_p3[i];
        }
    }

    std::vector<double> velocity() const {
        std::vector<double> v(sum_dx);
        for (double& x : v) x /= sum_dtau;
        return v;
    }

    double mean_tau() const { return sum_dtau / static_cast<double>(n_blocks); }

    // E[(p - dtau w)^2] with w = v . u, in closed form from the sums
    double c_u(std::size_t ui, double w) const {
        return (sum_p2[ui] - 2.0 * w * sum_p_dtau[ui] + w * w * sum_dtau2) /
               static_cast<double>(n_blocks);
    }
};

struct ReplicaOutput {
    std::vector<RegenSample> samples;  // kept only when estimates are requested
    BlockMoments moments;
    std::vector<CheckpointSnapshot> snapshots;
    std::string trajectory_csv;
    std::string regen_report_csv;  // replica 0 only
    bool censored = false;
    std::vector<std::string> warnings;
};

void write_file(const std::string& dir, const std::string& name, const std::string& content,
                std::vector<std::string>& written) {
    const std::filesystem::path path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << content;
    written.push_back(path.string());
}

std::string replica_file_name(std::int64_t replica) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "trajectory_%04lld.csv", static_cast<long long>(replica));
    return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, StageSelection stages) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    const std::vector<std::int64_t> checkpoint_values = cfg.checkpoints.values();
    if (stages.lil) {
        if (checkpoint_values.back() > cfg.horizon - cfg.guard) {
            throw ConfigError("largest checkpoint 2^" + std::to_string(cfg.checkpoints.max_exp) +
                              " must be <= horizon - guard for the curves to be determined");
        }
        static const double e2 = std::exp(2.0);
        if (static_cast<double>(checkpoint_values.front()) <= e2) {
            throw ConfigError("smallest checkpoint must exceed e^2");
        }
    }

    ExperimentResult result;
    result.manifest.version = kVersion;
    result.manifest.config_json = cfg.to_json_text();
    for (std::int64_t i = 0; i < cfg.replicas; ++i) {
        result.manifest.seeds.push_back(derive_replica_seeds(cfg, i));
    }
    if (cfg.model.dimension == 1) {
        result.manifest.warnings.push_back(
            "dimension 1 is a debugging baseline; the analysis targets d >= 2");
    }

    const std::optional<std::pair<int, int>> axis = axis_of(cfg.ell);
    const std::vector<std::int64_t> origin(static_cast<std::size_t>(cfg.model.dimension), 0);

    std::vector<ReplicaOutput> outputs(static_cast<std::size_t>(cfg.replicas));

    parallel_replicas(cfg.replicas, cfg.workers, [&](std::int64_t i) {
        ReplicaOutput& out = outputs[static_cast<std::size_t>(i)];
        out.moments.init(static_cast<std::size_t>(cfg.model.dimension), cfg.u_list.size());
        const ReplicaSeeds seeds = result.manifest.seeds[static_cast<std::size_t>(i)];
        const EnvironmentView env(cfg.model, seeds.env_seed);
        const Trajectory traj = simulate(env, origin, cfg.horizon, WalkSeed{seeds.replica_seed});

        RegenerationSequence regens;
        if (axis) {
            regens = detect_regenerations(
                std::span<const std::int64_t>(axis_projection(traj, axis->first, axis->second)),
                CensorPolicy{cfg.guard});
        } else {
            regens = detect_regenerations(std::span<const double>(projection(traj, cfg.ell)),
                                          CensorPolicy{cfg.guard});
        }
        out.censored = regens.censored_tail_from.has_value();

        std::vector<RegenSample> samples;
        if (regens.times.size() >= 2) {
            samples = extract_samples(traj, regens, cfg.ell);
            for (const RegenSample& s : samples) out.moments.add(s, cfg.u_list);
        } else {
            out.warnings.push_back("replica " + std::to_string(i) +
                                   ": InsufficientRegenerations (" +
                                   std::to_string(regens.times.size()) + " accepted times)");
        }

        if (stages.trajectories) {
            std::ostringstream os;
            write_trajectory_csv(os, traj, cfg.ell);
            out.trajectory_csv = os.str();
        }
        if (stages.estimates && i == 0) {
            std::ostringstream os;
            write_regen_report_csv(os, regens, block_increments(traj, regens, cfg.ell));
            out.regen_report_csv = os.str();
        }
        if (stages.lil) {
            out.snapshots.reserve(checkpoint_values.size());
            for (std::int64_t n : checkpoint_values) {
                out.snapshots.push_back(snapshot_at(traj, regens, n));
            }
        }
        if (stages.estimates) {
            out.samples = std::move(samples);
        }
    });

    // Deterministic reduction in replica order.
    BlockMoments pooled;
    pooled.init(static_cast<std::size_t>(cfg.model.dimension), cfg.u_list.size());
    std::int64_t censored_replicas = 0;
    for (const ReplicaOutput& out : outputs) {
        pooled.merge(out.moments);
        censored_replicas += out.censored ? 1 : 0;
        for (const std::string& w : out.warnings) result.manifest.warnings.push_back(w);
    }

    std::filesystem::create_directories(cfg.output_dir);

    if (stages.trajectories) {
        for (std::int64_t i = 0; i < cfg.replicas; ++i) {
            write_file(cfg.output_dir, replica_file_name(i),
                       outputs[static_cast<std::size_t>(i)].trajectory_csv, result.written_files);
        }
    }

    if (stages.estimates) {
        std::vector<RegenSample> all_samples;
        for (ReplicaOutput& out : outputs) {
            for (RegenSample& s : out.samples) all_samples.push_back(std::move(s));
            out.samples.clear();
        }
        if (pooled.n_blocks >= 2) {
            const BootstrapConfig boot{200, derive_key(stream_role::bootstrap, cfg.master_seed)};
            result.summary = summarize(all_samples, cfg.u_list, boot);

            nlohmann::json j;
            j["v_hat"] = result.summary->v_hat;
            j["se_v_hat"] = result.summary->se_v_hat;
            j["mean_tau_hat"] = result.summary->mean_tau_hat;
            j["se_mean_tau_hat"] = result.summary->se_mean_tau_hat;
            j["n_blocks"] = result.summary->n_blocks;
            j["n_first_blocks"] = result.summary->n_first_blocks;
            j["guard"] = cfg.guard;
            j["censored_replicas"] = censored_replicas;
            nlohmann::json dirs = nlohmann::json::array();
            for (const DirectionEstimates& d : result.summary->directions) {
                nlohmann::json dj;
                dj["u"] = d.u;
                dj["c_u_hat"] = d.c_u_hat;
                dj["se_c_u_hat"] = d.se_c_u_hat;
                dj["c_u_centered"] = d.c_u_centered;
                dj["c_hat_u_hat"] = d.c_hat_u_hat;
                dj["se_c_hat_u_hat"] = d.se_c_hat_u_hat;
                dj["first_sq"] = d.first_sq;
                dj["first_abs3"] = d.first_abs3;
                dirs.push_back(dj);
            }
            j["directions"] = dirs;

            const TailDiagnostic tail =
                tail_diagnostic(all_samples, TailDiagnosticConfig{cfg.gamma, cfg.c});
            j["tail_diagnostic"] = {{"gamma", cfg.gamma},
                                    {"c", cfg.c},
                                    {"value", tail.value},
                                    {"top_share", tail.top_share},
                                    {"unstable", tail.unstable}};

            nlohmann::json indep = nlohmann::json::array();
            for (std::size_t ui = 0; ui < cfg.u_list.size(); ++ui) {
                std::vector<double> z;
                z.reserve(all_samples.size());
                for (const RegenSample& s : all_samples) {
                    if (!s.first_block) {
                        z.push_back(z_increment(s, result.summary->v_hat, cfg.u_list[ui]));
                    }
                }
                nlohmann::json zj;
                zj["u"] = cfg.u_list[ui];
                try {
                    zj["lag1"] = independence_diagnostic(z, 1);
                    zj["lag2"] = independence_diagnostic(z, 2);
                } catch (const std::runtime_error& e) {
                    zj["error"] = e.what();
                }
                indep.push_back(zj);
            }
            j["independence"] = indep;

            const std::vector<std::int64_t> k_list{100, 1000, 10000, 100000, 1000000};
            nlohmann::json profiles = nlohmann::json::array();
            for (const DirectionEstimates& d : result.summary->directions) {
                nlohmann::json pj;
                pj["u"] = d.u;
                try {
                    pj["k"] = k_list;
                    pj["value"] = lyapunov_profile(d, k_list, 0.5);
                    pj["epsilon"] = 0.5;
                } catch (const DomainError& e) {
                    pj["error"] = e.what();
                }
                profiles.push_back(pj);
            }
            j["lyapunov_profile"] = profiles;

            write_file(cfg.output_dir, "estimates.json", j.dump(2) + "\n", result.written_files);
            write_file(cfg.output_dir, "regeneration_report.csv", outputs[0].regen_report_csv,
                       result.written_files);
        } else {
            result.manifest.warnings.push_back(
                "estimates skipped: fewer than 2 non-first regeneration blocks in total");
        }
    }

    if (stages.lil) {
        if (pooled.n_blocks >= 2) {
            const std::vector<double> v = pooled.velocity();
            const double mean_tau = pooled.mean_tau();
            const std::vector<double>& u0 = cfg.u_list[0];
            double w = 0.0;
            for (std::size_t i = 0; i < u0.size(); ++i) w += v[i] * u0[i];
            const double c_u = pooled.c_u(0, w);
            bool curve_failed = false;
            for (std::int64_t i = 0; i < cfg.replicas; ++i) {
                try {
                    result.curves.push_back(build_curve_from(
                        i, outputs[static_cast<std::size_t>(i)].snapshots, v, c_u, mean_tau, u0));
                } catch (const std::runtime_error& e) {
                    curve_failed = true;
                    result.manifest.warnings.push_back("replica " + std::to_string(i) +
                                                       ": curve skipped: " + e.what());
                }
            }
            if (!result.curves.empty()) {
                result.envelope = error_term_report(result.curves);
                std::ostringstream curves_os;
                write_lil_curves_csv(curves_os, result.curves);
                write_file(cfg.output_dir, "lil_curve.csv", curves_os.str(), result.written_files);
                std::ostringstream env_os;
                write_lil_envelope_csv(env_os, *result.envelope);
                write_file(cfg.output_dir, "lil_envelope.csv", env_os.str(), result.written_files);
            } else if (curve_failed) {
                result.manifest.warnings.push_back("lil curves skipped for all replicas");
            }
        } else {
            result.manifest.warnings.push_back(
                "lil curves skipped: fewer than 2 non-first regeneration blocks in total");
        }
    }

    const auto t_end = std::chrono::steady_clock::now();
    result.manifest.wall_seconds = std::chrono::duration<double>(t_end - t_start).count();
    write_file(cfg.output_dir, "manifest.json", result.manifest.to_json_text() + "\n",
               result.written_files);
    return result;
}

AnalyzeResult analyze_file(const std::string& path, std::span<const double> ell,
                           std::int64_t guard) {
    require_unit(ell);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open trajectory file " + path);
    }
    const Trajectory traj = read_trajectory_csv(in);
    if (static_cast<int>(ell.size()) != traj.dimension) {
        throw NotUnitVectorError("ell dimension does not match the trajectory file");
    }
    AnalyzeResult out;
    const std::optional<std::pair<int, int>> axis = axis_of(ell);
    if (axis) {
        out.regens = detect_regenerations(
            std::span<const std::int64_t>(axis_projection(traj, axis->first, axis->second)),
            CensorPolicy{guard});
    } else {
        out.regens = detect_regenerations(std::span<const double>(projection(traj, ell)),
                                          CensorPolicy{guard});
    }
    out.samples = block_increments(traj, out.regens, ell);
    return out;
}

}  // namespace rwre
