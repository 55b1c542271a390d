#include "qsync/experiments.hpp"

namespace qsync {

namespace {

RunConfig base_params(double lambda)
{
    RunConfig cfg;
    cfg.physical.gamma = 1.0;
    cfg.physical.lambda = lambda;
    cfg.physical.omega0 = kDefaultOmega0OverGamma;
    cfg.state = symmetric_state<double>();
    return cfg;
}

ExperimentConfig make(std::string name, ExperimentKind kind, double lambda)
{
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.output_label = std::move(name);
    cfg.kind = kind;
    cfg.base = base_params(lambda);
    return cfg;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fig2", "fig3", "fig4", "fig5", "fig6"}; }

ExperimentConfig preset(const std::string& name)
{
    ExperimentConfig cfg;
    if (name == "fig2") {
        // Weak coupling snapshots; gamma t = 3 and 5 both appear in the discussion.
        cfg = make(name, ExperimentKind::Snapshot, 5.0);
        cfg.tau_list = {0.0, 3.0, 5.0};
        cfg.combinations = {{0.0, 0.0}, {1e-11, 0.0}, {1e-11, 5.0}};
    } else if (name == "fig3") {
        cfg = make(name, ExperimentKind::Trace, 5.0);
        cfg.tau_range = TauRange{0.0, 10.0, 0.01};
        cfg.combinations = {{0.0, 0.0}, {1e-11, 0.0}, {1e-11, 5.0}};
    } else if (name == "fig4") {
        cfg = make(name, ExperimentKind::Snapshot, 0.01);
        cfg.tau_list = {0.0, 100.0};
        cfg.combinations = {{1e-11, 0.0}, {1e-10, 0.0}, {1e-11, 0.3}};
    } else if (name == "fig5") {
        cfg = make(name, ExperimentKind::Trace, 0.01);
        cfg.tau_range = TauRange{0.0, 100.0, 0.05};
        cfg.combinations = {{0.0, 0.0}, {1e-10, 0.0}, {3e-10, 0.0}, {1e-11, 0.2}};
    } else if (name == "fig6") {
        cfg = make(name, ExperimentKind::Trace, 0.01);
        cfg.tau_range = TauRange{0.0, 100.0, 0.05};
        cfg.beta_list = {0.0, 1e-11, 1e-10, 3e-10};
        cfg.delta_list = {0.0, 0.3};
        cfg.window = std::pair{50.0, 100.0};
    } else {
        std::string list;
        for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "'; valid presets: " + list, name);
    }
    validate(cfg);
    return cfg;
}

}  // namespace qsync
