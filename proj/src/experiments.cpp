#include "qsync/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <thread>

#include "qsync/csv.hpp"
#include "qsync/oracle.hpp"
#include "qsync/random.hpp"
#include "qsync/trajectory.hpp"

namespace qsync {

namespace {

constexpr double kGridTolerance = 1e-9;

PhysicalParamsd at_point(const RunConfig& base, const SweepPoint& p)
{
    PhysicalParamsd phys = base.physical;
    phys.beta = p.beta;
    phys.delta = p.delta;
    return phys;
}

std::vector<double> distinct_deltas(const std::vector<SweepPoint>& points)
{
    std::vector<double> out;
    for (const auto& p : points) {
        if (std::find(out.begin(), out.end(), p.delta) == out.end()) out.push_back(p.delta);
    }
    return out;
}

std::size_t delta_group(const std::vector<double>& deltas, double delta)
{
    return static_cast<std::size_t>(std::find(deltas.begin(), deltas.end(), delta) - deltas.begin());
}

// About 1% of the combinations, at least one, chosen reproducibly from the seed.
std::set<std::size_t> oracle_subsample(std::size_t n, std::uint64_t seed)
{
    const std::size_t m = std::max<std::size_t>(1, (n + 99) / 100);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    for (std::size_t i = 0; i < m && i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    return {idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(m, n))};
}

struct PointTrajectory {
    AmplitudeTrajectory<double> amplitude;
    std::optional<double> oracle_divergence;
};

PointTrajectory evaluate_point(const ExperimentConfig& cfg, const SweepPoint& p, std::span<const double> times,
                               bool cross_check)
{
    const auto sp = scale(at_point(cfg.base, p));
    PointTrajectory out{amplitude_trajectory<double>(sp, times), std::nullopt};
    if (cross_check && !out.amplitude.used_oracle) {
        std::vector<double> grid(times.begin(), times.end());
        const bool pad = grid.empty() || grid.front() != 0.0;
        if (pad) grid.insert(grid.begin(), 0.0);
        auto oracle = solve_volterra<double>(sp, grid);
        if (pad) oracle.erase(oracle.begin());
        out.oracle_divergence = max_divergence<double>(out.amplitude.values, oracle);
    }
    return out;
}

std::string divergence_error(const std::optional<double>& d)
{
    if (d && !(*d <= 1e-6)) return "analytic and oracle amplitudes diverge by " + format_double(*d);
    return {};
}

std::string delta_dir(std::size_t group) { return "delta_" + std::to_string(group); }

}  // namespace

std::vector<SweepPoint> ExperimentConfig::sweep() const
{
    if (!combinations.empty()) return combinations;
    std::vector<SweepPoint> pts;
    for (const double d : delta_list) {
        for (const double b : beta_list) pts.push_back({b, d});
    }
    return pts;
}

std::vector<double> ExperimentConfig::times() const
{
    if (!tau_list.empty()) return tau_list;
    std::vector<double> t;
    if (!tau_range) return t;
    const auto n = static_cast<long>(std::llround((tau_range->stop - tau_range->start) / tau_range->step));
    t.reserve(static_cast<std::size_t>(n + 1));
    for (long k = 0; k <= n; ++k) t.push_back(tau_range->start + static_cast<double>(k) * tau_range->step);
    return t;
}

std::pair<double, double> ExperimentConfig::trend_window() const
{
    if (window) return *window;
    const auto t = times();
    return t.empty() ? std::pair{0.0, 0.0} : std::pair{t.front(), t.back()};
}

void validate(const ExperimentConfig& cfg)
{
    if (cfg.name.empty()) throw ConfigError("experiment needs a name", "name");
    if (cfg.tau_list.empty() && !cfg.tau_range) throw ConfigError("one of tau_list or tau_range is required", "tau_list");
    if (cfg.tau_range) {
        const auto& r = *cfg.tau_range;
        if (!(r.step > 0) || !(r.stop >= r.start) || !(r.start >= 0)) {
            throw ConfigError("tau_range needs 0 <= start <= stop and step > 0", "tau_range");
        }
        if ((r.stop - r.start) / r.step > 1e7) throw ConfigError("tau_range has more than 1e7 points", "tau_range");
    }
    const auto t = cfg.times();
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(t[k] >= 0)) throw ConfigError("times must be non-negative", "tau_list");
        if (k > 0 && t[k] < t[k - 1]) throw ConfigError("times must be non-decreasing", "tau_list");
    }
    if (cfg.n_theta < 2 || cfg.n_phi < 2) throw ConfigError("grid needs n_theta >= 2 and n_phi >= 2", "n_theta");
    if (cfg.phi_probes.empty()) throw ConfigError("phi_probes must not be empty", "phi_probes");
    for (const double ph : cfg.phi_probes) {
        if (!(ph >= 0 && ph < 2 * std::numbers::pi)) throw ConfigError("phi probes must lie in [0, 2 pi)", "phi_probes");
    }
    if (cfg.combinations.empty() && (cfg.beta_list.empty() || cfg.delta_list.empty())) {
        throw ConfigError("sweep needs non-empty beta_list and delta_list, or combinations", "beta_list");
    }
    for (const auto& p : cfg.sweep()) {
        try {
            check_physical(at_point(cfg.base, p));
        } catch (const ParamError& e) {
            throw ConfigError(std::string("sweep point: ") + e.what(), "beta_list");
        }
    }
    if (cfg.window) {
        const auto [a, b] = *cfg.window;
        if (!(a <= b) || a < t.front() - kGridTolerance || b > t.back() + kGridTolerance) {
            throw ConfigError("window must lie inside the time range", "window");
        }
    }
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j)
{
    static const std::set<std::string> keys{"name",    "kind",       "params",       "tau_list", "tau_range",
                                            "n_theta", "n_phi",      "phi_probes",   "beta_list", "delta_list",
                                            "combinations", "window", "output_label", "seed"};
    if (!j.is_object()) throw ConfigError("experiment file must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!keys.count(key)) throw ConfigError("unknown key '" + key + "'", key);
    }

    ExperimentConfig cfg;
    try {
        cfg.name = j.value("name", std::string{});
        const std::string kind = j.value("kind", std::string{"snapshot"});
        if (kind == "snapshot") {
            cfg.kind = ExperimentKind::Snapshot;
        } else if (kind == "trace") {
            cfg.kind = ExperimentKind::Trace;
        } else {
            throw ConfigError("kind must be 'snapshot' or 'trace'", "kind");
        }
        if (!j.contains("params")) throw ConfigError("missing 'params' object", "params");
        cfg.base = parse_run_config(j.at("params"));
        if (j.contains("tau_list")) cfg.tau_list = j.at("tau_list").get<std::vector<double>>();
        if (j.contains("tau_range")) {
            const auto& r = j.at("tau_range");
            cfg.tau_range = TauRange{r.at("start").get<double>(), r.at("stop").get<double>(), r.at("step").get<double>()};
        }
        cfg.n_theta = j.value("n_theta", cfg.n_theta);
        cfg.n_phi = j.value("n_phi", cfg.n_phi);
        if (j.contains("phi_probes")) cfg.phi_probes = j.at("phi_probes").get<std::vector<double>>();
        if (j.contains("beta_list")) cfg.beta_list = j.at("beta_list").get<std::vector<double>>();
        if (j.contains("delta_list")) cfg.delta_list = j.at("delta_list").get<std::vector<double>>();
        if (j.contains("combinations")) {
            for (const auto& c : j.at("combinations")) {
                cfg.combinations.push_back({c.at("beta").get<double>(), c.at("delta").get<double>()});
            }
        }
        if (j.contains("window")) {
            const auto w = j.at("window").get<std::vector<double>>();
            if (w.size() != 2) throw ConfigError("window must be [start, stop]", "window");
            cfg.window = std::pair{w[0], w[1]};
        }
        cfg.output_label = j.value("output_label", cfg.name);
        cfg.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid experiment field: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path)
{
    return parse_experiment_config(read_json_file(path));
}

int worker_count()
{
    if (const char* env = std::getenv("QSYNC_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    }
}

FigureBundle run_snapshot_experiment(const ExperimentConfig& cfg, int threads)
{
    validate(cfg);
    const auto points = cfg.sweep();
    const auto times = cfg.times();
    const auto checked = oracle_subsample(points.size(), cfg.seed);
    const std::size_t nt = times.size();

    FigureBundle b;
    b.id = cfg.name;
    b.config = cfg;
    b.manifest.resize(points.size() * nt);
    b.snapshots.resize(points.size() * nt);

    parallel_for(points.size(), threads, [&](std::size_t i) {
        const auto& p = points[i];
        try {
            const auto traj = evaluate_point(cfg, p, times, checked.count(i) > 0);
            for (std::size_t k = 0; k < nt; ++k) {
                const auto rho = density_matrix(cfg.base.state, traj.amplitude.values[k]);
                SnapshotResult snap{p, times[k], husimi_grid(rho, cfg.n_theta, cfg.n_phi, times[k]), {}, peak_phase(rho)};
                snap.equator = husimi_equator<double>(rho, snap.grid.phi_nodes);

                auto& row = b.manifest[i * nt + k];
                row.used_oracle = traj.amplitude.used_oracle;
                row.peak_phase = snap.peak.phase;
                row.peak_height = snap.peak.height;
                row.oracle_divergence = traj.oracle_divergence;
                row.error = divergence_error(traj.oracle_divergence);
                b.snapshots[i * nt + k] = std::move(snap);
            }
        } catch (const std::exception& e) {
            for (std::size_t k = 0; k < nt; ++k) b.manifest[i * nt + k].error = e.what();
        }
    });

    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t k = 0; k < nt; ++k) {
            auto& row = b.manifest[i * nt + k];
            row.index = i * nt + k;
            row.point = points[i];
            row.tau = times[k];
            if (row.error.empty() || b.snapshots[row.index]) {
                const std::string stem = "snapshot_" + std::to_string(row.index);
                row.files = {stem + "_husimi.csv", stem + "_equator.csv"};
            }
        }
    }
    return b;
}

FigureBundle run_trace_experiment(const ExperimentConfig& cfg, int threads)
{
    validate(cfg);
    const auto points = cfg.sweep();
    const auto times = cfg.times();
    const auto checked = oracle_subsample(points.size(), cfg.seed);
    const auto deltas = distinct_deltas(points);
    const double half_pi = std::numbers::pi / 2;

    FigureBundle b;
    b.id = cfg.name;
    b.config = cfg;
    b.manifest.resize(points.size());
    b.traces.resize(points.size());

    parallel_for(points.size(), threads, [&](std::size_t i) {
        const auto& p = points[i];
        auto& row = b.manifest[i];
        try {
            const auto traj = evaluate_point(cfg, p, times, checked.count(i) > 0);
            std::vector<DensityMatrixd> rhos;
            rhos.reserve(times.size());
            TraceResult tr{p, traj.amplitude.values, {}, {}, {}};
            for (const auto& e : traj.amplitude.values) {
                rhos.push_back(density_matrix(cfg.base.state, e));
                tr.q_equator_zero.push_back(husimi_q(rhos.back(), half_pi, 0.0));
                tr.q_pole.push_back(husimi_q(rhos.back(), 0.0, 0.0));
            }
            tr.trace = track_peak_phase<double>(rhos, times, cfg.phi_probes);
            row.used_oracle = traj.amplitude.used_oracle;
            row.peak_phase = tr.trace.peak_phase.back();
            row.peak_height = tr.trace.peak_height.back();
            row.oracle_divergence = traj.oracle_divergence;
            row.error = divergence_error(traj.oracle_divergence);
            b.traces[i] = std::move(tr);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    for (std::size_t i = 0; i < points.size(); ++i) {
        auto& row = b.manifest[i];
        row.index = i;
        row.point = points[i];
        if (b.traces[i]) {
            const std::string stem = delta_dir(delta_group(deltas, points[i].delta)) + "/trace_" + std::to_string(i);
            row.files = {stem + "_sync.csv", stem + "_probes.csv", stem + "_amplitude.csv"};
        }
    }
    return b;
}

FigureBundle run_experiment(const ExperimentConfig& cfg, int threads)
{
    return cfg.kind == ExperimentKind::Snapshot ? run_snapshot_experiment(cfg, threads)
                                                : run_trace_experiment(cfg, threads);
}

double window_mean(std::span<const double> tau, std::span<const double> v, double a, double b)
{
    double area = 0, first = NAN, last = NAN, prev_t = NAN, prev_v = NAN;
    std::size_t count = 0;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        if (tau[k] < a - kGridTolerance || tau[k] > b + kGridTolerance) continue;
        if (count == 0) {
            first = tau[k];
        } else {
            area += (tau[k] - prev_t) * (v[k] + prev_v) / 2;
        }
        prev_t = last = tau[k];
        prev_v = v[k];
        ++count;
    }
    if (count == 0) throw std::invalid_argument("window contains no samples");
    return count == 1 ? prev_v : area / (last - first);
}

bool locked_over(const SyncTraced& trace, double a, double b)
{
    bool any = false;
    for (std::size_t k = 0; k < trace.tau_grid.size(); ++k) {
        const double t = trace.tau_grid[k];
        if (t < a - kGridTolerance || t > b + kGridTolerance) continue;
        any = true;
        const auto& ph = trace.peak_phase[k];
        if (!ph || circular_distance(*ph, 0.0) >= kLockedPhaseRadius || !(trace.peak_height[k] > kDecoherenceThreshold)) {
            return false;
        }
    }
    return any;
}

int phase_alternations(const SyncTraced& trace, double radius)
{
    int switches = 0;
    int last = -1;  // 0: near phi = 0, 1: near phi = pi
    for (const auto& ph : trace.peak_phase) {
        if (!ph) continue;
        int here = -1;
        if (circular_distance(*ph, 0.0) < radius) here = 0;
        else if (circular_distance(*ph, std::numbers::pi) < radius) here = 1;
        if (here < 0) continue;
        if (last >= 0 && here != last) ++switches;
        last = here;
    }
    return switches;
}

std::vector<double> TrendReport::deltas() const
{
    std::vector<double> d;
    for (const auto& r : rows) {
        if (std::find(d.begin(), d.end(), r.point.delta) == d.end()) d.push_back(r.point.delta);
    }
    return d;
}

std::vector<const TrendRow*> TrendReport::beta_series(double delta) const
{
    std::vector<const TrendRow*> s;
    for (const auto& r : rows) {
        if (r.point.delta == delta) s.push_back(&r);
    }
    return s;
}

bool TrendReport::monotone_in_beta(double delta) const
{
    const auto s = beta_series(delta);
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (s[k]->locking_score < s[k - 1]->locking_score) return false;
    }
    return true;
}

bool TrendReport::strictly_increasing_in_beta(double delta) const
{
    const auto s = beta_series(delta);
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (!(s[k]->locking_score > s[k - 1]->locking_score)) return false;
    }
    return true;
}

bool TrendReport::amplitude_decreases_with_delta(double beta) const
{
    std::vector<const TrendRow*> s;
    for (const auto& r : rows) {
        if (r.point.beta == beta) s.push_back(&r);
    }
    std::sort(s.begin(), s.end(), [](const TrendRow* a, const TrendRow* b) { return a->point.delta < b->point.delta; });
    if (s.size() < 2) return false;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (!(s[k]->oscillation_amplitude < s[k - 1]->oscillation_amplitude)) return false;
    }
    return true;
}

TrendReport trend_report(const FigureBundle& bundle)
{
    const auto& cfg = bundle.config;
    if (cfg.kind != ExperimentKind::Trace) throw std::invalid_argument("trend report needs a trace bundle");
    const auto probe = std::find(cfg.phi_probes.begin(), cfg.phi_probes.end(), 0.0);
    if (probe == cfg.phi_probes.end()) throw std::invalid_argument("trend report needs a phi = 0 probe");
    const auto p0 = static_cast<std::size_t>(probe - cfg.phi_probes.begin());

    TrendReport rep;
    rep.window = cfg.trend_window();
    const auto [a, b] = rep.window;
    for (std::size_t i = 0; i < bundle.traces.size(); ++i) {
        if (!bundle.traces[i]) {
            throw std::invalid_argument("trend report over a failed combination: " + bundle.manifest[i].error);
        }
        const auto& tr = bundle.traces[i]->trace;
        std::vector<double> s0(tr.tau_grid.size());
        for (std::size_t k = 0; k < s0.size(); ++k) s0[k] = tr.s(k, p0);

        TrendRow row;
        row.point = bundle.traces[i]->point;
        row.locking_score = window_mean(tr.tau_grid, s0, a, b);
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t k = 0; k < s0.size(); ++k) {
            if (tr.tau_grid[k] < a - kGridTolerance || tr.tau_grid[k] > b + kGridTolerance) continue;
            lo = std::min(lo, s0[k]);
            hi = std::max(hi, s0[k]);
        }
        row.oscillation_amplitude = hi - lo;
        row.locked = locked_over(tr, a, b);
        rep.rows.push_back(row);
    }

    std::vector<double> order = rep.deltas();
    std::stable_sort(rep.rows.begin(), rep.rows.end(), [&order](const TrendRow& x, const TrendRow& y) {
        const auto gx = std::find(order.begin(), order.end(), x.point.delta) - order.begin();
        const auto gy = std::find(order.begin(), order.end(), y.point.delta) - order.begin();
        if (gx != gy) return gx < gy;
        return x.point.beta < y.point.beta;
    });
    return rep;
}

nlohmann::json manifest_json(const FigureBundle& bundle)
{
    const auto& cfg = bundle.config;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : bundle.manifest) {
        nlohmann::json row{{"index", r.index},
                           {"beta", r.point.beta},
                           {"delta", r.point.delta},
                           {"files", r.files},
                           {"used_oracle", r.used_oracle},
                           {"peak_height", r.peak_height}};
        row["tau"] = r.tau ? nlohmann::json(*r.tau) : nlohmann::json(nullptr);
        row["peak_phase"] = r.peak_phase ? nlohmann::json(*r.peak_phase) : nlohmann::json(nullptr);
        row["oracle_divergence"] = r.oracle_divergence ? nlohmann::json(*r.oracle_divergence) : nlohmann::json(nullptr);
        row["error"] = r.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.error);
        rows.push_back(std::move(row));
    }
    const auto times = cfg.times();
    nlohmann::json j{{"experiment", bundle.id},
                     {"kind", cfg.kind == ExperimentKind::Snapshot ? "snapshot" : "trace"},
                     {"params", to_json(cfg.base)},
                     {"tau_first", times.front()},
                     {"tau_last", times.back()},
                     {"tau_count", times.size()},
                     {"n_theta", cfg.n_theta},
                     {"n_phi", cfg.n_phi},
                     {"phi_probes", cfg.phi_probes},
                     {"seed", cfg.seed},
                     {"rows", std::move(rows)}};
    return j;
}

void write_bundle(const FigureBundle& bundle, const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto open = [&dir](const std::string& rel) {
        const fs::path p = dir / rel;
        fs::create_directories(p.parent_path());
        std::ofstream os(p, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        return os;
    };

    for (const auto& row : bundle.manifest) {
        if (row.files.empty()) continue;
        if (bundle.config.kind == ExperimentKind::Snapshot) {
            const auto& s = *bundle.snapshots[row.index];
            auto h = open(row.files[0]);
            write_husimi_csv(h, s.grid);
            auto e = open(row.files[1]);
            write_equator_csv(e, s.grid.phi_nodes, s.equator);
        } else {
            const auto& t = *bundle.traces[row.index];
            auto s = open(row.files[0]);
            write_sync_csv(s, t.trace);
            auto p = open(row.files[1]);
            write_probe_csv(p, t.trace.tau_grid, t.q_equator_zero, t.q_pole);
            auto a = open(row.files[2]);
            write_amplitude_csv(a, t.trace.tau_grid, t.amplitude);
        }
    }

    if (bundle.config.kind == ExperimentKind::Trace) {
        try {
            const auto rep = trend_report(bundle);
            auto os = open("trend.csv");
            os << "delta,beta,locking_score,oscillation_amplitude,locked\n";
            for (const auto& r : rep.rows) {
                os << format_double(r.point.delta) << ',' << format_double(r.point.beta) << ','
                   << format_double(r.locking_score) << ',' << format_double(r.oscillation_amplitude) << ','
                   << (r.locked ? "true" : "false") << '\n';
            }
        } catch (const std::invalid_argument&) {
            // not comparable; the manifest still records every row
        }
    }

    auto m = open("manifest.json");
    m << manifest_json(bundle).dump(2) << '\n';
}

}  // namespace qsync
