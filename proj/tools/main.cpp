// Batch experiment driver: reproduces the tree-height study at configurable
// scale, runs the finite-dimensional-distribution and height-scaling checks,
// and renders summary plots. Configure through a JSON file and/or flags;
// outputs are CSV tables and static SVGs in the chosen directory.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smcgen/errors.hpp"
#include "smcgen/experiment.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string model;
    std::string permute;
    std::vector<int> particles;
    std::vector<int> leaf_sizes;
    std::vector<std::string> schemes;
    int replicates = -1;
    int horizon = -1;
    long long seed = -1;
    int threads = -1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--out-dir", flags.out_dir, "output directory");
    cmd->add_option("--model", flags.model, "model preset: ou or neutral");
    cmd->add_option("--particles", flags.particles, "particle counts N")->delimiter(',');
    cmd->add_option("--n", flags.leaf_sizes, "leaf-set sizes")->delimiter(',');
    cmd->add_option("--replicates", flags.replicates, "replicates per cell");
    cmd->add_option("--resampling", flags.schemes,
                    "schemes: multinomial residual stratified systematic")
        ->delimiter(',');
    cmd->add_option("--horizon", flags.horizon, "forward generations (0 = 50*N)");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--threads", flags.threads, "worker threads for replicates");
    cmd->add_option("--permute-ancestors", flags.permute, "on, off, or auto");
}

smcgen::ExperimentConfig build_config(const CommonFlags& flags) {
    smcgen::ExperimentConfig config;
    if (!flags.config_path.empty()) config = smcgen::load_config(flags.config_path);
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (!flags.model.empty()) config.model = smcgen::parse_model_preset(flags.model);
    if (!flags.particles.empty()) config.particle_counts = flags.particles;
    if (!flags.leaf_sizes.empty()) config.leaf_sizes = flags.leaf_sizes;
    if (flags.replicates >= 0) config.replicates = flags.replicates;
    if (!flags.schemes.empty()) {
        config.schemes.clear();
        for (const auto& name : flags.schemes)
            config.schemes.push_back(smcgen::parse_scheme(name));
    }
    if (flags.horizon >= 0) config.horizon = flags.horizon;
    if (flags.seed >= 0) config.master_seed = static_cast<std::uint64_t>(flags.seed);
    if (flags.threads >= 0) config.threads = flags.threads;
    if (!flags.permute.empty()) config.permute = smcgen::parse_permute_mode(flags.permute);
    return config;
}

void print_error_line(const std::string& type, const std::string& message) {
    std::string escaped;
    for (char c : message) {
        if (c == '"' || c == '\\') escaped += '\\';
        if (c == '\n') {
            escaped += ' ';
            continue;
        }
        escaped += c;
    }
    std::fprintf(stderr, "{\"error\":{\"type\":\"%s\",\"message\":\"%s\"}}\n", type.c_str(),
                 escaped.c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequential Monte Carlo genealogy experiments"};
    app.require_subcommand(1);

    CommonFlags heights_flags, fdd_flags, scaling_flags;
    int fdd_leaves = 2;
    std::vector<double> fdd_times = {0.5, 1.0};
    int scaling_leaves = 2;
    std::string plot_summary, plot_dir;

    auto* heights = app.add_subcommand(
        "heights", "tree-height study: per-scheme mean/variance across leaf-set sizes");
    add_common_flags(heights, heights_flags);

    auto* fdd = app.add_subcommand(
        "fdd", "finite-dimensional distributions at time-changed query times");
    add_common_flags(fdd, fdd_flags);
    fdd->add_option("--fdd-leaves", fdd_leaves, "observed leaves (2 or 3)");
    fdd->add_option("--times", fdd_times, "query times, increasing")->delimiter(',');

    auto* scaling =
        app.add_subcommand("scaling", "tree-height moments against the particle count");
    add_common_flags(scaling, scaling_flags);
    scaling->add_option("--scaling-leaves", scaling_leaves, "observed leaves");

    auto* plot = app.add_subcommand("plot", "re-render SVG plots from a summary.csv");
    plot->add_option("--summary", plot_summary, "summary.csv produced by `heights`")->required();
    plot->add_option("--out-dir", plot_dir, "output directory (default: alongside the summary)");

    try {
        app.parse(argc, argv);

        if (heights->parsed()) {
            auto config = build_config(heights_flags);
            const auto result = smcgen::run_height_experiment(config);
            std::printf("heights: %zu summary rows, %lld excluded runs, %lld invariant "
                        "violations -> %s\n",
                        result.rows.size(), result.excluded_runs, result.invariants.total(),
                        config.out_dir.c_str());
            if (result.invariants.total() != 0) {
                print_error_line("invariant", "per-path invariant violations recorded");
                return 1;
            }
        } else if (fdd->parsed()) {
            auto config = build_config(fdd_flags);
            config.leaf_sizes = {fdd_leaves};
            const auto report = smcgen::run_fdd_experiment(config, fdd_leaves, fdd_times);
            for (const auto& cell : report.cells)
                std::printf("fdd: scheme=%s N=%d tv_conditional=%.5f tv_traced=%.5f "
                            "censored=%lld\n",
                            cell.scheme.c_str(), cell.num_particles, cell.tv_conditional,
                            cell.tv_traced, cell.fdd_censored);
        } else if (scaling->parsed()) {
            auto config = build_config(scaling_flags);
            config.leaf_sizes = {scaling_leaves};
            const auto report = smcgen::run_scaling_experiment(config, scaling_leaves);
            for (const auto& fit : report.fits)
                std::printf("scaling: scheme=%s mean_slope=%.4f var_slope=%.4f\n",
                            fit.scheme.c_str(), fit.mean_fit.slope, fit.var_fit.slope);
        } else if (plot->parsed()) {
            const auto rows = smcgen::summary_from_csv(plot_summary);
            std::string dir = plot_dir;
            if (dir.empty()) {
                const auto slash = plot_summary.find_last_of('/');
                dir = slash == std::string::npos ? "." : plot_summary.substr(0, slash);
            }
            smcgen::emit_plots(rows, dir);
            std::printf("plot: wrote SVGs to %s\n", dir.c_str());
        }
        return 0;
    } catch (const CLI::ParseError& err) {
        if (err.get_exit_code() == 0) return 0; // --help
        print_error_line("usage", err.what());
        return app.exit(err);
    } catch (const smcgen::ConfigError& err) {
        print_error_line("config", err.what());
        return 1;
    } catch (const smcgen::Error& err) {
        print_error_line("runtime", err.what());
        return 1;
    } catch (const std::exception& err) {
        print_error_line("internal", err.what());
        return 1;
    }
}
