#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "qsync/params.hpp"
#include "qsync/random.hpp"

namespace qsync {

struct VerifyOptions {
    std::uint64_t seed = 0;
    int count = 200;
    /// Debug hook: the closed-form path multiplies a0 by this factor.
    double a0_factor = 1.0;
    int threads = 1;
};

/// Tolerances of the randomized verification suite.
struct VerifyTolerances {
    static constexpr double divergence = 1e-6;
    static constexpr double residual = 1e-10;  // relative to max(1, |a0|)
    static constexpr double sum_c = 1e-10;
    static constexpr double sum_qc = 1e-10;
    static constexpr double sum_q2c = 1e-9;
    static constexpr double cubic_ulps = 8.0;  // expansion mismatch, in units of eps * magnitude
    static constexpr double husimi = 1e-12;
    static constexpr double sync = 1e-8;
    static constexpr double positivity = 1e-12;
    static constexpr double unit_disk = 1e-8;
};

struct VerifyCase {
    int case_id = 0;
    PhysicalParamsd params;
    InitialQubitStated state;
    double max_divergence = 0;
    double root_residual = 0;
    double moment_errors[3] = {0, 0, 0};
    double cubic_mismatch = 0;  // in units of eps * magnitude
    double husimi_error = 0;    // closed form vs coherent-state overlap, max over probes
    double sync_error = 0;      // closed form vs theta quadrature, max over probes
    double max_abs_sync = 0;
    double min_determinant = 0;
    double max_abs_amplitude = 0;
    bool pass = false;
    std::string failure;
};

struct VerifyReport {
    std::vector<VerifyCase> cases;
    bool all_pass() const;
};

inline constexpr int kHusimiProbesPerCase = 50;
inline constexpr int kSyncProbesPerCase = 4;
inline constexpr double kVerifyHorizon = 100.0;
inline constexpr std::size_t kVerifyGridPoints = 2001;

/// Random parameter draw: lambda/gamma log-uniform in [0.005, 10], delta/gamma
/// uniform in [-1, 1], beta uniform in [0, 3e-10], omega0/gamma = 1.5e9.
PhysicalParamsd draw_parameters(Rng& rng);

/// Runs every randomized check per case; identical options give identical reports.
VerifyReport run_verification(const VerifyOptions& opt);

/// case_id,max_divergence,pass
void write_verify_csv(std::ostream& os, const VerifyReport& report);

}  // namespace qsync
