#pragma once

// Experiment specs, batch runs, sweeps and the oracle self-check behind the
// command-line tool.
//
// Spec files are flat INI-style text:
//
//   [channel]
//   M = 8
//   m = 4
//   mu = 0.5            # one value for all branches, or M values
//   gamma_th = 1
//   [run]
//   methods = pis, et, ce
//   seed = 1
//   samples = 1000000   # default per-method sample count
//   samples.uis = 5000000
//   [sweep]
//   axis = gamma_th     # or mu
//   values = 0.4, 0.3, 0.2
//   [hyper]
//   rho = 0.1
//   ce_pilot = 100000
//   mls_target = 0.2
//   mls_pilot = 10000
//   mls_per_level = 10000
//   mls_replications = 50
//   mls_levels = 0.3, 0.6, 1   # optional; skips the pilot

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "outage/estimators.hpp"
#include "outage/model.hpp"

namespace outage {

/// Invalid spec text; carries the 1-based line number (0 when not tied to a line).
class SpecError : public std::runtime_error {
public:
    SpecError(const std::string& source, int line, const std::string& message);
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct HyperParams {
    double rho = 0.1;
    std::uint64_t ce_pilot = 100000;
    double mls_target = 0.2;
    std::uint64_t mls_pilot = 10000;
    std::uint64_t mls_per_level = 10000;
    std::uint64_t mls_replications = 50;
    std::optional<std::vector<double>> mls_levels;
};

enum class SweepKind { gamma_th, mu };

struct SweepAxis {
    SweepKind kind = SweepKind::gamma_th;
    std::vector<double> values;
};

struct ExperimentSpec {
    std::size_t M = 0;
    std::size_t m = 0;
    /// One value (broadcast) or M values.
    std::vector<double> mu;
    double gamma_th = 0.0;
    std::vector<Method> methods;
    std::uint64_t default_samples = 1000000;
    std::map<Method, std::uint64_t> samples;
    std::uint64_t seed = 1;
    std::optional<SweepAxis> sweep;
    HyperParams hyper;

    ChannelConfig config() const;
    /// Config at one sweep point.
    ChannelConfig config_at(double axis_value) const;
    std::uint64_t samples_for(Method method) const;
};

ExperimentSpec parse_spec(std::istream& in, const std::string& source = "<spec>");
ExperimentSpec parse_spec_file(const std::filesystem::path& path);

/// One estimator run with its diagnostics, or the error that stopped it.
struct MethodRun {
    Method method;
    ChannelConfig config;
    std::optional<EstimateResult> result;
    std::string error;
    /// The error came from the estimator itself (as opposed to the method not
    /// applying to this config).
    bool runtime_failure = false;
    /// Method-specific diagnostics, serialized JSON object text.
    std::string diagnostics_json = "{}";
};

struct RunSettings {
    unsigned workers = 1;
    std::optional<std::uint64_t> seed;  // overrides the spec
    double mode_constant = kDefaultModeConstant;
};

MethodRun run_method(Method method, const ChannelConfig& config, const ExperimentSpec& spec,
                     const RunSettings& settings);

/// All methods at the spec's base point (no sweep).
std::vector<MethodRun> run_experiment(const ExperimentSpec& spec, const RunSettings& settings);

struct SweepPoint {
    double axis_value;
    MethodRun run;
};

std::vector<SweepPoint> run_sweep(const ExperimentSpec& spec, const RunSettings& settings);

/// CSV header shared by results files.
std::string results_csv_header();
std::string results_csv_row(const MethodRun& run);
/// (axis_value, method, scv) rows; contains no timing, so it is reproducible
/// byte-for-byte for a fixed seed.
std::string sweep_scv_csv(const std::vector<SweepPoint>& points);

std::string results_json(const ExperimentSpec& spec, const RunSettings& settings, const std::vector<MethodRun>& runs,
                         const std::vector<double>* axis_values = nullptr);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifySettings {
    std::uint64_t seed = 20240601;
    unsigned workers = 1;
    double mode_constant = kDefaultModeConstant;
};

/// Closed-form edges, small-instance NMC agreement, variance closed forms and
/// the rejection-bound guard.
std::vector<CheckResult> verify_suite(const VerifySettings& settings);

}  // namespace outage
