// Command-line front end: amplitude, husimi, sync, figure and verify.
//
// Exit codes: 0 success, 1 verification or runtime failure, 2 usage or
// configuration error, 3 physicality violation.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsync/amplitude.hpp"
#include "qsync/config.hpp"
#include "qsync/csv.hpp"
#include "qsync/experiments.hpp"
#include "qsync/oracle.hpp"
#include "qsync/state.hpp"
#include "qsync/trajectory.hpp"
#include "qsync/verify.hpp"

namespace fs = std::filesystem;
using namespace qsync;

namespace {

constexpr int kExitVerify = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPhysical = 3;

struct Globals {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double a0_factor = 1.0;
};

struct TauFlags {
    double min = 0.0;
    double max = 10.0;
    double step = 0.01;
};

RunConfig require_config(const Globals& g)
{
    if (g.config.empty()) throw ConfigError("this command needs --config PATH", "--config");
    return load_run_config(g.config);
}

std::vector<double> tau_grid(const TauFlags& t)
{
    if (!(t.min >= 0) || !(t.max >= t.min)) throw ConfigError("need 0 <= --tau-min <= --tau-max", "--tau-max");
    if (t.max == t.min) return {t.min};
    if (!(t.step > 0)) throw ConfigError("--tau-step must be positive", "--tau-step");
    const auto n = static_cast<long>(std::llround((t.max - t.min) / t.step));
    if (n > 10'000'000) throw ConfigError("time grid exceeds 1e7 points", "--tau-step");
    std::vector<double> g;
    for (long k = 0; k <= n; ++k) g.push_back(std::min(t.max, t.min + static_cast<double>(k) * t.step));
    if (g.back() < t.max) g.push_back(t.max);
    return g;
}

ScaledParamsd scaled_with_warnings(const RunConfig& cfg)
{
    auto sp = scale(cfg.physical);
    for (const auto& w : sp.warnings) std::cerr << "warning: " << w << '\n';
    return sp;
}

// Closed form (or integrator fallback); a0_factor != 1 is the debug path that
// deliberately corrupts the characteristic cubic.
std::vector<std::complex<double>> amplitudes(const ScaledParamsd& sp, std::span<const double> grid, double a0_factor)
{
    if (a0_factor == 1.0) return amplitude_trajectory<double>(sp, grid).values;
    auto cubic = build_cubic(sp);
    cubic.a0 *= a0_factor;
    auto v = eval_amplitude_grid<double>(residues(sp, solve_cubic(cubic)), grid);
    check_amplitude_bound<double>(v, grid);
    return v;
}

// Renders the whole output in memory first so a failure leaves no partial file.
void emit(const Globals& g, const std::string& name, const std::string& text)
{
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    fs::create_directories(g.out);
    std::ofstream os(fs::path(g.out) / (name + ".csv"), std::ios::binary);
    if (!os) throw std::runtime_error("cannot write into " + g.out);
    os << text;
}

int cmd_amplitude(const Globals& g, const TauFlags& t)
{
    const auto cfg = require_config(g);
    const auto grid = tau_grid(t);
    const auto sp = scaled_with_warnings(cfg);
    const auto e = amplitudes(sp, grid, g.a0_factor);
    std::ostringstream os;
    write_amplitude_csv(os, grid, e);
    emit(g, "amplitude", os.str());
    return 0;
}

int cmd_husimi(const Globals& g, double tau, int n_theta, int n_phi, bool equator)
{
    const auto cfg = require_config(g);
    if (!(tau >= 0)) throw ConfigError("--tau must be non-negative", "--tau");
    if (n_theta < 2 || n_phi < 2) throw ConfigError("grid needs at least 2 x 2 nodes", "--n-theta");
    const auto sp = scaled_with_warnings(cfg);
    const std::vector<double> grid{tau};
    const auto rho = density_matrix(cfg.state, amplitudes(sp, grid, g.a0_factor).front());
    std::ostringstream os;
    if (equator) {
        const auto phi = uniform_phi_nodes<double>(n_phi);
        write_equator_csv(os, phi, husimi_equator<double>(rho, phi));
    } else {
        write_husimi_csv(os, husimi_grid(rho, n_theta, n_phi, tau));
    }
    emit(g, equator ? "husimi_equator" : "husimi", os.str());
    return 0;
}

int cmd_sync(const Globals& g, const TauFlags& t, const std::vector<double>& phis)
{
    const auto cfg = require_config(g);
    const auto grid = tau_grid(t);
    for (const double ph : phis) {
        if (!(ph >= 0 && ph < 2 * std::numbers::pi)) throw ConfigError("--phi values must lie in [0, 2 pi)", "--phi");
    }
    const auto sp = scaled_with_warnings(cfg);
    const auto e = amplitudes(sp, grid, g.a0_factor);
    std::vector<DensityMatrixd> rhos;
    rhos.reserve(e.size());
    for (const auto& v : e) rhos.push_back(density_matrix(cfg.state, v));
    std::ostringstream os;
    write_sync_csv(os, track_peak_phase<double>(rhos, grid, phis));
    emit(g, "sync", os.str());
    return 0;
}

int cmd_figure(const Globals& g, const std::string& name, const std::string& experiment)
{
    if (name.empty() == experiment.empty()) throw ConfigError("give either a preset name or --experiment PATH", "preset");
    auto cfg = experiment.empty() ? preset(name) : load_experiment_config(experiment);
    if (g.seed_given) cfg.seed = g.seed;
    const auto bundle = run_experiment(cfg, worker_count());
    const fs::path dir = fs::path(g.out.empty() ? "figures" : g.out) / cfg.output_label;
    write_bundle(bundle, dir);

    int failed = 0;
    for (const auto& row : bundle.manifest) {
        if (!row.error.empty()) {
            ++failed;
            std::cerr << "row " << row.index << ": " << row.error << '\n';
        }
    }
    std::cerr << cfg.name << ": " << bundle.manifest.size() << " rows written to " << dir.string() << '\n';
    return failed ? kExitVerify : 0;
}

int cmd_verify(const Globals& g, int count)
{
    if (count < 0) throw ConfigError("--count must be non-negative", "--count");
    VerifyOptions opt;
    opt.seed = g.seed;
    opt.count = count;
    opt.a0_factor = g.a0_factor;
    opt.threads = worker_count();
    const auto rep = run_verification(opt);
    std::ostringstream os;
    write_verify_csv(os, rep);
    emit(g, "verify", os.str());

    int failed = 0;
    for (const auto& c : rep.cases) {
        if (!c.pass) {
            ++failed;
            std::cerr << "case " << c.case_id << " failed: " << c.failure << '\n';
        }
    }
    std::cerr << rep.cases.size() - failed << "/" << rep.cases.size() << " cases passed\n";
    return failed ? kExitVerify : 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Survival amplitude, Husimi Q and synchronization measure of a qubit moving through a leaky cavity"};
    app.fallthrough();
    app.require_subcommand(1);

    Globals g;
    app.add_option("--config", g.config, "Flat JSON parameter file");
    app.add_option("--out", g.out, "Output directory (CSV goes to stdout when omitted)");
    auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--debug-a0-factor", g.a0_factor, "Scale the cubic's constant term (failure-path testing)")
        ->group("");

    TauFlags t;
    auto* amp = app.add_subcommand("amplitude", "Survival amplitude E(tau)");
    amp->add_option("--tau-min", t.min, "First scaled time")->capture_default_str();
    amp->add_option("--tau-max", t.max, "Last scaled time")->capture_default_str();
    amp->add_option("--tau-step", t.step, "Time step")->capture_default_str();

    double tau = 0.0;
    int n_theta = 64, n_phi = 128;
    bool equator = false;
    auto* hus = app.add_subcommand("husimi", "Husimi Q over the Bloch sphere at one time");
    hus->add_option("--tau", tau, "Scaled time")->capture_default_str();
    hus->add_option("--n-theta", n_theta, "Gauss-Legendre nodes in cos(theta)")->capture_default_str();
    hus->add_option("--n-phi", n_phi, "Uniform phi nodes")->capture_default_str();
    hus->add_flag("--equator", equator, "Emit only the theta = pi/2 slice");

    TauFlags ts;
    std::vector<double> phis{0.0};
    auto* syn = app.add_subcommand("sync", "Synchronization measure S(phi, tau) and peak phase");
    syn->add_option("--phi", phis, "Probe phases, comma separated")->delimiter(',');
    syn->add_option("--tau-min", ts.min, "First scaled time")->capture_default_str();
    syn->add_option("--tau-max", ts.max, "Last scaled time")->capture_default_str();
    syn->add_option("--tau-step", ts.step, "Time step")->capture_default_str();

    std::string preset_name, experiment;
    auto* fig = app.add_subcommand("figure", "Run a figure preset or an experiment file");
    fig->add_option("preset", preset_name, "fig2 | fig3 | fig4 | fig5 | fig6");
    fig->add_option("--experiment", experiment, "Experiment JSON file");

    int count = 200;
    auto* ver = app.add_subcommand("verify", "Randomized analytic-vs-oracle verification suite");
    ver->add_option("--count", count, "Number of random cases")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (*amp) return cmd_amplitude(g, t);
        if (*hus) return cmd_husimi(g, tau, n_theta, n_phi, equator);
        if (*syn) return cmd_sync(g, ts, phis);
        if (*fig) return cmd_figure(g, preset_name, experiment);
        if (*ver) return cmd_verify(g, count);
    } catch (const ConfigError& e) {
        std::cerr << "config error";
        if (!e.key().empty()) std::cerr << " [" << e.key() << "]";
        if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
        std::cerr << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParamError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const PhysicalityError& e) {
        std::cerr << "physicality violation: " << e.what() << '\n';
        return kExitPhysical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitVerify;
    }
    return kExitUsage;
}
