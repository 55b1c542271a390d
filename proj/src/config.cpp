#include "qsync/config.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

namespace qsync {

nlohmann::json parse_json_text(const std::string& text)
{
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
        throw ConfigError("malformed JSON at line " + std::to_string(line) + ": " + e.what(), {}, line);
    }
}

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str());
}

RunConfig parse_run_config(const nlohmann::json& j)
{
    if (!j.is_object()) throw ConfigError("parameter file must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(std::begin(kRunConfigKeys), std::end(kRunConfigKeys), key) == std::end(kRunConfigKeys)) {
            throw ConfigError("unknown key '" + key + "'", key);
        }
        if (!value.is_number()) throw ConfigError("key '" + key + "' must be a number", key);
    }
    const auto get = [&j](const char* key, double fallback) {
        return j.contains(key) ? j.at(key).get<double>() : fallback;
    };

    if (!j.contains("lambda")) throw ConfigError("missing required key 'lambda'", "lambda");

    RunConfig cfg;
    cfg.physical.gamma = get("gamma", 1.0);
    cfg.physical.lambda = j.at("lambda").get<double>();
    cfg.physical.delta = get("delta", 0.0);
    cfg.physical.omega0 = get("omega0", kDefaultOmega0OverGamma * cfg.physical.gamma);
    cfg.physical.beta = get("beta", 0.0);

    const bool any_state = j.contains("c0_re") || j.contains("c0_im") || j.contains("c1_re") || j.contains("c1_im");
    InitialQubitStated raw;
    if (any_state) {
        raw.c0 = {get("c0_re", 0.0), get("c0_im", 0.0)};
        raw.c1 = {get("c1_re", 0.0), get("c1_im", 0.0)};
    } else {
        raw.c0 = raw.c1 = {1.0, 0.0};
    }

    try {
        check_physical(cfg.physical);
        cfg.state = validate_state(raw);
    } catch (const ParamError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    return parse_run_config(read_json_file(path));
}

nlohmann::json to_json(const RunConfig& cfg)
{
    return {{"gamma", cfg.physical.gamma},   {"lambda", cfg.physical.lambda}, {"delta", cfg.physical.delta},
            {"omega0", cfg.physical.omega0}, {"beta", cfg.physical.beta},     {"c0_re", cfg.state.c0.real()},
            {"c0_im", cfg.state.c0.imag()},  {"c1_re", cfg.state.c1.real()},  {"c1_im", cfg.state.c1.imag()}};
}

}  // namespace qsync
