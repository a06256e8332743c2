#pragma once

#include <vector>

#include "fpvio/core/types.hpp"

namespace fpvio {

/**
 * High-pass component of a uniformly sampled signal: windowed-sinc (Blackman)
 * low-pass at cutoff_hz subtracted from the input. Edges use reflection.
 */
std::vector<double> highpass(const std::vector<double>& signal, double sample_rate_hz,
                             double cutoff_hz, int taps = 301);

/// RMS of the >cutoff component of a 3-axis series (e.g. position error).
double highpass_rms(const std::vector<Vec3>& series, double sample_rate_hz,
                    double cutoff_hz);

}  // namespace fpvio
