#pragma once

#include <string>
#include <vector>

#include "kslab/sde_sim.hpp"
#include "kslab/thresholds.hpp"

// On-disk formats: RFC-4180 CSV ('.' decimal separator, UTF-8, LF line ends)
// and a compact little-endian binary dump for ensembles.  All writers are
// deterministic functions of their inputs.

namespace kslab {
namespace io {

// Writes rows of doubles with a header line; numbers are emitted with 17
// significant digits so round-trips are bit-exact.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_double(double v);

// Threshold curve as CSV (columns: alpha, nu_max).
void write_threshold_curve_csv(const std::string& path, const ThresholdCurve& curve);

// Ensemble terminals as CSV (columns: trajectory, coordinate, value).
void write_ensemble_csv(const std::string& path, const Ensemble& ensemble);

// Compact binary ensemble dump: magic "KSEN", version, params, spec, then per
// trajectory the stopping time (NaN if none) and the dN terminal coordinates,
// all little-endian 64-bit floats / fixed-width integers.  The dump carries
// terminals only; a reloaded ensemble's initial condition is a placeholder, so
// consumers needing R_0 (validate_radial) must work from a fresh simulation.
void write_ensemble_binary(const std::string& path, const Ensemble& ensemble);
Ensemble read_ensemble_binary(const std::string& path);

}  // namespace io
}  // namespace kslab
