#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rwre/acceptance.hpp"
#include "rwre/csv.hpp"
#include "rwre/errors.hpp"
#include "rwre/harness.hpp"

// Exit codes: 0 success, 1 config/parse errors, 2 failed verify checks.

namespace {

struct CommonOptions {
    std::string config_path;
    std::string preset = "drifted_point_mass";
    std::vector<double> ell;
    std::vector<double> u;
    std::int64_t horizon = -1;
    std::int64_t replicas = -1;
    std::int64_t guard = -1;
    std::uint64_t master_seed = 0;
    bool have_seed = false;
    std::string output_dir;
    int workers = -1;
    bool fixed_env = false;
    int checkpoint_min = -1;
    int checkpoint_max = -1;
    double gamma = -1.0;
    double c = -1.0;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--config", opt.config_path, "experiment config JSON file");
    cmd->add_option("--preset", opt.preset,
                    "model preset: drifted_point_mass, elliptic_perturbation, two_kernel_mixture");
    cmd->add_option("--ell", opt.ell, "direction of progress (unit vector components)");
    cmd->add_option("--u", opt.u, "projection direction for curves (unit vector components)");
    cmd->add_option("--horizon", opt.horizon, "steps per replica");
    cmd->add_option("--replicas", opt.replicas, "number of replicas");
    cmd->add_option("--guard", opt.guard, "censor guard steps");
    cmd->add_option("--master-seed", opt.master_seed, "master seed")->each([&](const std::string&) {
        opt.have_seed = true;
    });
    cmd->add_option("--output-dir", opt.output_dir, "output directory");
    cmd->add_option("--workers", opt.workers, "worker threads (0 = hardware)");
    cmd->add_flag("--fixed-env", opt.fixed_env, "reuse one environment across replicas (quenched)");
    cmd->add_option("--checkpoint-min", opt.checkpoint_min, "smallest dyadic checkpoint exponent");
    cmd->add_option("--checkpoint-max", opt.checkpoint_max, "largest dyadic checkpoint exponent");
    cmd->add_option("--gamma", opt.gamma, "tail diagnostic exponent in (0,1)");
    cmd->add_option("--c", opt.c, "tail diagnostic rate > 0");
}

rwre::ExperimentConfig resolve_config(const CommonOptions& opt) {
    rwre::ExperimentConfig cfg;
    if (!opt.config_path.empty()) {
        cfg = rwre::ExperimentConfig::from_json_file(opt.config_path);
    } else {
        cfg.model = rwre::ExperimentConfig::preset_model(opt.preset);
        cfg.ell = {1.0, 0.0};
        cfg.u_list = {{1.0, 0.0}, {0.0, 1.0}};
    }
    if (!opt.ell.empty()) cfg.ell = opt.ell;
    if (!opt.u.empty()) cfg.u_list = {opt.u};
    if (opt.horizon >= 0) cfg.horizon = opt.horizon;
    if (opt.replicas >= 0) cfg.replicas = opt.replicas;
    if (opt.guard >= 0) cfg.guard = opt.guard;
    if (opt.have_seed) cfg.master_seed = opt.master_seed;
    if (!opt.output_dir.empty()) cfg.output_dir = opt.output_dir;
    if (opt.workers >= 0) cfg.workers = opt.workers;
    if (opt.fixed_env) cfg.fixed_env = true;
    if (opt.checkpoint_min > 0) cfg.checkpoints.min_exp = opt.checkpoint_min;
    if (opt.checkpoint_max > 0) cfg.checkpoints.max_exp = opt.checkpoint_max;
    if (opt.gamma > 0.0) cfg.gamma = opt.gamma;
    if (opt.c > 0.0) cfg.c = opt.c;
    cfg.validate();
    return cfg;
}

void print_summary(const rwre::ExperimentResult& result) {
    if (result.summary) {
        const auto& s = *result.summary;
        std::cout << "blocks: " << s.n_blocks << " (plus " << s.n_first_blocks << " first blocks)\n";
        std::cout << "v_hat:";
        for (std::size_t i = 0; i < s.v_hat.size(); ++i) {
            std::cout << ' ' << rwre::format_double(s.v_hat[i]) << " (se "
                      << rwre::format_double(s.se_v_hat[i]) << ')';
        }
        std::cout << "\nmean_tau_hat: " << rwre::format_double(s.mean_tau_hat) << " (se "
                  << rwre::format_double(s.se_mean_tau_hat) << ")\n";
        for (const auto& d : s.directions) {
            std::cout << "u = (";
            for (std::size_t i = 0; i < d.u.size(); ++i) {
                std::cout << (i ? "," : "") << d.u[i];
            }
            std::cout << "): c_u_hat = " << rwre::format_double(d.c_u_hat) << " (se "
                      << rwre::format_double(d.se_c_u_hat)
                      << "), c_hat_u_hat = " << rwre::format_double(d.c_hat_u_hat) << '\n';
        }
    }
    for (const std::string& f : result.written_files) {
        std::cout << "wrote " << f << '\n';
    }
    for (const std::string& w : result.manifest.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lattice random-walk laboratory: regeneration structure, "
                 "velocity/variance constants, and iterated-logarithm curves"};
    app.require_subcommand(1);
    app.set_version_flag("--version", rwre::kVersion);

    CommonOptions opt;

    CLI::App* sim = app.add_subcommand("simulate", "simulate replicas and emit trajectory CSVs");
    add_common(sim, opt);

    CLI::App* estimate =
        app.add_subcommand("estimate", "estimate constants and diagnostics -> estimates.json");
    add_common(estimate, opt);

    CLI::App* lil = app.add_subcommand("lil", "emit LIL curves and cross-replica envelope");
    add_common(lil, opt);

    CLI::App* analyze = app.add_subcommand("analyze", "detect regenerations in a trajectory CSV");
    std::string analyze_input;
    std::string analyze_output;
    std::vector<double> analyze_ell{1.0, 0.0};
    std::int64_t analyze_guard = 1000;
    analyze->add_option("--input", analyze_input, "trajectory CSV path")->required();
    analyze->add_option("--output", analyze_output, "report CSV path (default: stdout)");
    analyze->add_option("--ell", analyze_ell, "direction of progress");
    analyze->add_option("--guard", analyze_guard, "censor guard steps");

    CLI::App* verify = app.add_subcommand("verify", "run the full acceptance suite");
    int verify_workers = 0;
    std::string verify_dir = "verify_out";
    verify->add_option("--workers", verify_workers, "worker threads (0 = hardware)");
    verify->add_option("--output-dir", verify_dir, "scratch directory for the suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const rwre::ExperimentConfig cfg = resolve_config(opt);
            print_summary(rwre::run_experiment(cfg, rwre::StageSelection{true, false, false}));
        } else if (estimate->parsed()) {
            const rwre::ExperimentConfig cfg = resolve_config(opt);
            print_summary(rwre::run_experiment(cfg, rwre::StageSelection{false, true, false}));
        } else if (lil->parsed()) {
            const rwre::ExperimentConfig cfg = resolve_config(opt);
            print_summary(rwre::run_experiment(cfg, rwre::StageSelection{false, false, true}));
        } else if (analyze->parsed()) {
            const rwre::AnalyzeResult result =
                rwre::analyze_file(analyze_input, analyze_ell, analyze_guard);
            if (analyze_output.empty()) {
                rwre::write_regen_report_csv(std::cout, result.regens, result.samples);
            } else {
                std::ofstream out(analyze_output, std::ios::binary);
                if (!out) throw rwre::IoError("cannot write " + analyze_output);
                rwre::write_regen_report_csv(out, result.regens, result.samples);
                std::cout << "wrote " << analyze_output << '\n';
            }
            if (result.regens.censored_tail_from) {
                std::cerr << "note: candidates from step " << *result.regens.censored_tail_from
                          << " were unconfirmed within the horizon\n";
            }
        } else if (verify->parsed()) {
            const auto results = rwre::run_acceptance(std::cout, verify_workers, verify_dir);
            return rwre::acceptance_exit_code(results);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
