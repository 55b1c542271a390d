#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qsync/params.hpp"

namespace qsync {

/// Invalid configuration; carries the offending key and/or source line when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::string key = {}, int line = 0)
        : std::runtime_error(what), key_(std::move(key)), line_(line)
    {
    }
    const std::string& key() const { return key_; }
    int line() const { return line_; }

private:
    std::string key_;
    int line_;
};

struct RunConfig {
    PhysicalParamsd physical;
    InitialQubitStated state = symmetric_state<double>();
};

/// Keys accepted in a flat parameter file.
inline constexpr const char* kRunConfigKeys[] = {"gamma", "lambda", "delta", "omega0", "beta",
                                                  "c0_re", "c0_im", "c1_re", "c1_im"};

/// Reads the JSON text, reporting syntax errors with their line number.
nlohmann::json parse_json_text(const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Flat key-value parameters. lambda is required; other keys default to
/// gamma = 1, delta = 0, omega0 = 1.5e9 gamma, beta = 0 and the symmetric
/// initial state. Unknown keys and non-numeric values are errors. The result
/// has been validated.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace qsync
