#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boltzlab/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = "out";
    long seed = -1;
};

void attach_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "configuration file (INI)");
    sub->add_option("--set", opts.overrides, "override: section.key=value")->take_all();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "master RNG seed");
}

int run_mode(const std::string& mode, const CommonOpts& opts) {
    boltzlab::Config cfg;
    if (!opts.config_path.empty()) cfg = boltzlab::Config::parse_file(opts.config_path);
    for (const auto& ov : opts.overrides) cfg.set(ov);
    if (opts.seed >= 0) cfg.set("seed", std::to_string(opts.seed));
    auto report = boltzlab::run_experiment(cfg, mode, opts.out_dir);
    std::fputs(report.text.c_str(), stdout);
    return report.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"boltzlab: moment bounds and particle simulation for the homogeneous "
                 "Boltzmann equation with hard-potential cutoff kernels"};
    app.require_subcommand(1);

    const char* modes[] = {"gamma", "bounds", "simulate", "verify", "creation", "propagation"};
    const char* help[] = {
        "compute the angular-averaging constants gamma_p",
        "compute hierarchy parameters, envelopes and exponential-moment constants",
        "run the Nanbu-Babovsky particle solver",
        "run the deterministic inequality and sampling audits",
        "exponential-moment creation experiment (bounds + particle validation)",
        "exponential-moment propagation experiment (bounds + particle validation)",
    };
    CommonOpts opts[6];
    for (int i = 0; i < 6; ++i) attach_common(app.add_subcommand(modes[i], help[i]), opts[i]);

    CommonOpts plot_opts;
    auto* plot = app.add_subcommand("plot", "render SVG plots from an output directory");
    attach_common(plot, plot_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (plot->parsed()) {
            auto written = boltzlab::emit_plots(plot_opts.out_dir);
            if (written.empty())
                std::fprintf(stderr, "warning: no plottable CSV inputs in %s\n",
                             plot_opts.out_dir.c_str());
            for (const auto& f : written) std::printf("%s\n", f.c_str());
            return 0;
        }
        for (int i = 0; i < 6; ++i)
            if (app.get_subcommands().front()->get_name() == modes[i])
                return run_mode(modes[i], opts[i]);
        return 2;
    } catch (const boltzlab::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
