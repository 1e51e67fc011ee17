#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "boltzlab/dsmc.hpp"
#include "boltzlab/ode_bounds.hpp"
#include "boltzlab/povzner.hpp"

namespace boltzlab {

// Configuration or I/O problem; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sectioned key-value configuration ("section.key" -> string). Values keep
// their raw text; typed accessors parse on demand.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text);

    // Applies a "section.key=value" override (the --set flag).
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    // Comma lists plus linspace(a,b,n) / logspace(a,b,n) helpers.
    std::vector<double> get_grid(const std::string& key,
                                 const std::vector<double>& fallback) const;

    // Canonical text form; re-parsing it reproduces the configuration.
    std::string echo() const;
    std::uint64_t content_hash() const;

private:
    std::map<std::string, std::string> values_;
};

struct Assertion {
    std::string name;
    bool pass = true;
    double tolerance = 0.0;
    double slack = 0.0; // margin by which the assertion holds (negative = fail)
    std::string note;
};

struct RunReport {
    bool all_pass = true;
    std::vector<Assertion> assertions;
    std::vector<std::string> files; // manifest, paths relative to the output dir
    std::string text;               // the full rendered report
    HierarchyParams params;         // filled by the bound-computing modes
    double a = 0.0, T = 0.0, C = 0.0;

    void add(Assertion as);
};

// Builds the kernel / initial data / run configuration described by the
// [kernel], [initial] and [run] blocks. Exposed for tests and the CLI.
AngularKernel kernel_from_config(const Config& cfg);
InitialDataSpec initial_from_config(const Config& cfg);
RunConfig run_from_config(const Config& cfg);

// Orchestrates one experiment. mode is one of gamma, bounds, simulate,
// verify, creation, propagation. Writes CSV outputs and report.txt into
// out_dir and returns the report.
RunReport run_experiment(const Config& cfg, const std::string& mode,
                         const std::string& out_dir);

// Renders SVG plots from the CSV files already present in dir. Returns the
// files written. Missing inputs produce warnings, not errors.
std::vector<std::string> emit_plots(const std::string& dir);

// Deterministic inequality suites shared by the verify mode and the test
// driver. Each returns assertions with per-suite counts in the note.
std::vector<Assertion> verify_convolution_suite(std::uint64_t seed, int sequences, int n);
std::vector<Assertion> verify_binomial_suite(std::uint64_t seed, int trials);
std::vector<Assertion> verify_kernel_inequalities(std::uint64_t seed, int trials);

// CSV writers (single source of truth for the file formats).
void write_gamma_csv(const std::string& path, const GammaTable& table);
void write_moment_csv(const std::string& path, const MomentVector& mv);
void write_trajectory_csv(const std::string& path, const RunResult& result);
void write_conservation_csv(const std::string& path, const RunResult& result);
void write_constants_csv(const std::string& path, const HierarchyParams& par, double a,
                         double T, double C);
void write_envelope_csv(const std::string& path, const EnvelopeTrajectory& env);

} // namespace boltzlab
