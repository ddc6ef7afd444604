#pragma once

#include <string>
#include <vector>

#include "kshift/sweep.hpp"

namespace kshift {

/// Writes two static SVG charts per decay value: variance vs n and squared
/// bias vs n on log-log axes, each with the seed mean, a +/- 1 std band, and
/// the theoretical bound overlay ("scaled V" / "scaled B"). The bound series
/// is rescaled so its value at the largest n matches the empirical mean
/// there; the factor is printed in the legend. Series data are embedded as
/// XML comments. Returns the written file paths.
std::vector<std::string> emit_plots(const std::vector<SweepRecord>& records,
                                    const std::string& path_prefix);

}  // namespace kshift
