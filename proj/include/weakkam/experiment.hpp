#pragma once

#include "weakkam/dynamics.hpp"
#include "weakkam/lo_solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace weakkam::experiment {

enum class SweepKind { lambda, t, I };

/// Metric names and their CSV columns:
///   C0             sup |u - ref| modulo constants
///   hausdorff      Hausdorff distance between the graph clouds of c + du and of the reference
///   fiberwise      sup over the cloud of |p - (c + dref)(theta)|
///   d21            grid (or oracle quadrature) integral of |D^2u - D^2ref|
///   measure_exceed measure of {D^2u - D^2ref >= eps}
///   sup_d2         max |D^2u - D^2ref|
/// Each row also carries `status` ("ok" or "failed: <reason>").
const std::vector<std::string>& metric_names();

struct ExperimentSpec {
    std::string name;
    std::string model = "pendulum";   ///< model_from_spec string
    SweepKind sweep = SweepKind::lambda;
    std::vector<double> values;       ///< strictly monotone
    int n = 128;
    double tau = 0.02;
    double c = 0.0;                   ///< cohomology (d = 1); ignored by I sweeps, which use c = I
    double lambda = 0.0;              ///< fixed discount for t sweeps
    /// Additive constant of the Lagrangian. Unset: estimated once for lambda sweeps, 0 otherwise
    /// (a constant only shifts the fields, and every metric ignores constants).
    std::optional<double> alpha;
    std::vector<std::string> metrics;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    /// "oracle" (pendulum closed forms) or "solver" (weak-KAM fixed point of the same model)
    std::string reference = "oracle";
    /// I sweeps: "oracle" evaluates the metrics on closed forms, "solver" on solve_weak_kam fields
    std::string field = "solver";
    double u0_amplitude = 0.0;        ///< initial field u0 = a cos(2 pi theta_1)
    double fix_tol = 1e-7;
    int max_iters = 200000;
    std::optional<double> vel_bound_override;
    bool cubic = false;
    double eps = 0.05;                ///< measure_exceed threshold
    std::size_t cloud_limit = 20000;  ///< larger clouds are subsampled with the seed
    int workers = 1;                  ///< sweep points computed concurrently
    double budget_seconds = 300.0;

    void validate() const;
    SolverConfig solver_config() const;
};

/// Built-in presets: discounted-pendulum, cohom-pendulum, lo-iteration, lo-pendulum.
ExperimentSpec preset(const std::string& name);
std::vector<std::string> preset_names();

/// JSON round trip; unknown keys are rejected.
std::string to_json(const ExperimentSpec& spec);
ExperimentSpec from_json(const std::string& text);

struct Row {
    double x = 0.0;
    std::vector<double> metrics;  ///< same order as spec.metrics, NaN when failed
    std::string status = "ok";
    double seconds = 0.0;
};

struct RunManifest {
    std::string config_hash;  ///< FNV-1a 64 of the canonical JSON spec, hex
    std::string version;
    std::vector<Row> rows;
    double total_seconds = 0.0;
    double budget_seconds = 0.0;
};

/// Runs the sweep. Rows come back in sweep order.
RunManifest run(const ExperimentSpec& spec);

/// Writes <name>.csv, <name>_<metric>.dat and <name>_manifest.json into spec.output_dir.
/// Returns the CSV path.
std::string write_outputs(const ExperimentSpec& spec, const RunManifest& manifest);

/// CSV bytes as written by write_outputs (no timings, so identical runs give identical bytes).
std::string csv_text(const ExperimentSpec& spec, const RunManifest& manifest);

std::string fnv1a_hex(const std::string& bytes);
const char* version();

}  // namespace weakkam::experiment
