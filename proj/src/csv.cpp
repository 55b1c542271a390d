#include "qsync/csv.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace qsync {

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_amplitude_csv(std::ostream& os, std::span<const double> tau, std::span<const std::complex<double>> values)
{
    os << "tau,re_E,im_E,abs_E\n";
    for (std::size_t k = 0; k < tau.size(); ++k) {
        os << format_double(tau[k]) << ',' << format_double(values[k].real()) << ','
           << format_double(values[k].imag()) << ',' << format_double(std::abs(values[k])) << '\n';
    }
}

void write_husimi_csv(std::ostream& os, const PhaseSpaceGridd& grid)
{
    os << "theta,phi,Q\n";
    for (std::size_t i = 0; i < grid.n_theta(); ++i) {
        for (std::size_t j = 0; j < grid.n_phi(); ++j) {
            os << format_double(grid.theta_nodes[i]) << ',' << format_double(grid.phi_nodes[j]) << ','
               << format_double(grid(i, j)) << '\n';
        }
    }
}

void write_equator_csv(std::ostream& os, std::span<const double> phi, std::span<const double> q)
{
    os << "theta,phi,Q\n";
    const std::string theta = format_double(std::numbers::pi / 2);
    for (std::size_t j = 0; j < phi.size(); ++j) os << theta << ',' << format_double(phi[j]) << ',' << format_double(q[j]) << '\n';
}

void write_sync_csv(std::ostream& os, const SyncTraced& trace)
{
    os << "tau,phi,S,peak_phase,peak_height\n";
    for (std::size_t k = 0; k < trace.tau_grid.size(); ++k) {
        const std::string tau = format_double(trace.tau_grid[k]);
        const std::string peak = trace.peak_phase[k] ? format_double(*trace.peak_phase[k]) : "nan";
        const std::string height = format_double(trace.peak_height[k]);
        for (std::size_t p = 0; p < trace.phi_probes.size(); ++p) {
            os << tau << ',' << format_double(trace.phi_probes[p]) << ',' << format_double(trace.s(k, p)) << ',' << peak
               << ',' << height << '\n';
        }
    }
}

void write_probe_csv(std::ostream& os, std::span<const double> tau, std::span<const double> q_equator_zero,
                     std::span<const double> q_pole)
{
    os << "tau,Q_equator_phi0,Q_pole\n";
    for (std::size_t k = 0; k < tau.size(); ++k) {
        os << format_double(tau[k]) << ',' << format_double(q_equator_zero[k]) << ',' << format_double(q_pole[k])
           << '\n';
    }
}

}  // namespace qsync
