#pragma once

#include <string>

#include "skewer/environment.hpp"
#include "skewer/metrics.hpp"

namespace skewer {

// CSV conventions: '.' decimal separator, ',' delimiter, '\n' line ends,
// UTF-8. Floats are written in shortest round-trip form.
std::string format_double(double v);

// Header then one row per round: t, item_id, class, action, propensity,
// loss, success, cumulative_loss. Rounds carrying LinUCB scores add
// est_<a> and width_<a> columns per arm.
void write_trace_csv(const Trace& trace, const std::string& path);

// Header then one row per cell: the grid parameters, then mean, std, ci95,
// seeds (plus regret columns when a baseline was fitted). The ci95 field is
// empty when fewer than two seeds ran; failed cells leave the stats empty.
void write_sweep_csv(const SweepReport& report, const std::string& path);

}  // namespace skewer
