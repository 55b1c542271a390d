#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qsync/config.hpp"
#include "qsync/state.hpp"

namespace qsync {

enum class ExperimentKind { Snapshot, Trace };

struct SweepPoint {
    double beta{0};
    double delta{0};
};

struct TauRange {
    double start{0};
    double stop{0};
    double step{0};
};

/// Operational thresholds for phase locking.
inline constexpr double kLockedPhaseRadius = 0.2;
inline constexpr double kDecoherenceThreshold = 1e-3;

struct ExperimentConfig {
    std::string name;
    ExperimentKind kind{ExperimentKind::Snapshot};
    RunConfig base;  // beta and delta are overridden per sweep point

    std::vector<double> tau_list;
    std::optional<TauRange> tau_range;
    int n_theta = 64;
    int n_phi = 128;
    std::vector<double> phi_probes{0.0};

    // Cartesian product beta_list x delta_list, unless combinations is given.
    std::vector<double> beta_list;
    std::vector<double> delta_list;
    std::vector<SweepPoint> combinations;

    std::optional<std::pair<double, double>> window;  // trend window in tau
    std::string output_label;
    std::uint64_t seed = 0;  // selects the oracle cross-check subsample

    /// Sweep points in manifest order (delta varies slowest).
    std::vector<SweepPoint> sweep() const;
    /// Snapshot times, or the uniform trace grid.
    std::vector<double> times() const;
    std::pair<double, double> trend_window() const;
};

/// Throws ConfigError when the configuration is unusable.
void validate(const ExperimentConfig& cfg);

ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
/// Built-in configurations reproducing the published figures; throws ConfigError for unknown names.
ExperimentConfig preset(const std::string& name);

struct ManifestRow {
    std::size_t index{0};
    SweepPoint point;
    std::optional<double> tau;  // snapshots only
    std::vector<std::string> files;
    bool used_oracle{false};
    std::optional<double> peak_phase;
    double peak_height{0};
    std::optional<double> oracle_divergence;
    std::string error;
};

struct SnapshotResult {
    SweepPoint point;
    double tau{0};
    PhaseSpaceGridd grid;
    std::vector<double> equator;  // Q(pi/2, phi) on grid.phi_nodes
    PeakPhase<double> peak;
};

struct TraceResult {
    SweepPoint point;
    std::vector<std::complex<double>> amplitude;
    SyncTraced trace;
    std::vector<double> q_equator_zero;  // Q(pi/2, 0, tau)
    std::vector<double> q_pole;          // Q(0, phi, tau), independent of phi
};

struct FigureBundle {
    std::string id;
    ExperimentConfig config;
    std::vector<ManifestRow> manifest;
    // Indexed like manifest; empty results mark combinations that failed.
    std::vector<std::optional<SnapshotResult>> snapshots;
    std::vector<std::optional<TraceResult>> traces;
};

/// Worker count from QSYNC_THREADS, defaulting to the hardware concurrency.
int worker_count();
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

FigureBundle run_snapshot_experiment(const ExperimentConfig& cfg, int threads = worker_count());
FigureBundle run_trace_experiment(const ExperimentConfig& cfg, int threads = worker_count());
FigureBundle run_experiment(const ExperimentConfig& cfg, int threads = worker_count());

struct TrendRow {
    SweepPoint point;
    double locking_score{0};          // time average of S(0, tau) over the window
    double oscillation_amplitude{0};  // max - min of S(0, tau) over the window
    bool locked{false};
};

struct TrendReport {
    std::pair<double, double> window;
    std::vector<TrendRow> rows;  // grouped by delta, beta ascending within a group

    std::vector<double> deltas() const;
    std::vector<const TrendRow*> beta_series(double delta) const;
    bool monotone_in_beta(double delta) const;
    bool strictly_increasing_in_beta(double delta) const;
    /// Oscillation amplitude strictly decreasing as delta grows at fixed beta.
    bool amplitude_decreases_with_delta(double beta) const;
};

/// Locking scores of a trace bundle; throws std::invalid_argument for bundles
/// that are not comparable (not a trace, no phi = 0 probe, window off-grid, failed rows).
TrendReport trend_report(const FigureBundle& bundle);

/// Time average of an equally spaced series over [a, b] by the trapezoid rule.
double window_mean(std::span<const double> tau, std::span<const double> v, double a, double b);

/// Locked over [a, b]: peak phase defined, within kLockedPhaseRadius of 0 and
/// peak height above kDecoherenceThreshold at every sample.
bool locked_over(const SyncTraced& trace, double a, double b);

/// Number of switches between the neighbourhoods of phi = 0 and phi = pi
/// (radius in radians) visited by the tracked peak phase.
int phase_alternations(const SyncTraced& trace, double radius = 0.5);

/// Writes every CSV plus manifest.json (and trend.csv for comparable trace bundles) into dir.
void write_bundle(const FigureBundle& bundle, const std::filesystem::path& dir);
nlohmann::json manifest_json(const FigureBundle& bundle);

}  // namespace qsync
