#include "fpvio/eval/signal.hpp"

#include <cmath>
#include <stdexcept>

namespace fpvio {

std::vector<double> highpass(const std::vector<double>& signal, double sample_rate_hz,
                             double cutoff_hz, int taps) {
  if (taps % 2 == 0) ++taps;
  const int half = taps / 2;
  const int n = static_cast<int>(signal.size());
  if (n == 0) return {};

  // Blackman-windowed sinc low-pass kernel.
  std::vector<double> kernel(taps);
  const double fc = cutoff_hz / sample_rate_hz;
  double sum = 0.0;
  for (int i = 0; i < taps; ++i) {
    const int m = i - half;
    const double sinc =
        m == 0 ? 2.0 * M_PI * fc : std::sin(2.0 * M_PI * fc * m) / m;
    const double window = 0.42 - 0.5 * std::cos(2.0 * M_PI * i / (taps - 1)) +
                          0.08 * std::cos(4.0 * M_PI * i / (taps - 1));
    kernel[i] = sinc * window;
    sum += kernel[i];
  }
  for (double& k : kernel) k /= sum;

  auto reflect = [&](int idx) {
    while (idx < 0 || idx >= n) {
      if (idx < 0) idx = -idx - 1;
      if (idx >= n) idx = 2 * n - idx - 1;
    }
    return idx;
  };

  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double low = 0.0;
    for (int k = 0; k < taps; ++k) low += kernel[k] * signal[reflect(i + k - half)];
    out[i] = signal[i] - low;
  }
  return out;
}

double highpass_rms(const std::vector<Vec3>& series, double sample_rate_hz,
                    double cutoff_hz) {
  if (series.empty()) return 0.0;
  double sum_sq = 0.0;
  int count = 0;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> s(series.size());
    for (size_t i = 0; i < series.size(); ++i) s[i] = series[i][axis];
    const auto hp = highpass(s, sample_rate_hz, cutoff_hz);
    for (const double v : hp) {
      sum_sq += v * v;
      ++count;
    }
  }
  return std::sqrt(sum_sq / count);
}

}  // namespace fpvio
