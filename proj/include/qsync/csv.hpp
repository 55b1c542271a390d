#pragma once

#include <complex>
#include <optional>
#include <ostream>
#include <span>
#include <string>

#include "qsync/state.hpp"

namespace qsync {

/// Shortest text with 17 significant digits, so every value round-trips.
std::string format_double(double v);

void write_amplitude_csv(std::ostream& os, std::span<const double> tau, std::span<const std::complex<double>> values);
void write_husimi_csv(std::ostream& os, const PhaseSpaceGridd& grid);
/// theta = pi/2 slice of Q.
void write_equator_csv(std::ostream& os, std::span<const double> phi, std::span<const double> q);
/// One row per (tau, phi probe); peak_phase is "nan" where the phase is undefined.
void write_sync_csv(std::ostream& os, const SyncTraced& trace);
/// Q(pi/2, 0, tau) and Q(0, ., tau) probe curves.
void write_probe_csv(std::ostream& os, std::span<const double> tau, std::span<const double> q_equator_zero,
                     std::span<const double> q_pole);

}  // namespace qsync
