#include "unilift/metrics/timing.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace unilift::metrics {

double median_call_seconds(const std::function<void()>& fn, int repeats, double min_sample_seconds) {
  using clock = std::chrono::steady_clock;
  std::vector<double> samples;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    const auto start = clock::now();
    long calls = 0;
    double elapsed = 0.0;
    do {
      fn();
      ++calls;
      elapsed = std::chrono::duration<double>(clock::now() - start).count();
    } while (elapsed < min_sample_seconds);
    samples.push_back(elapsed / static_cast<double>(calls));
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

TimingComparison timing_compare(const std::function<void()>& single_stage_decode,
                                const std::function<void()>& baseline_cluster_assign, std::size_t pixels) {
  TimingComparison out;
  out.pixels = pixels;
  out.decode_seconds = median_call_seconds(single_stage_decode, 5, 0.02);
  out.baseline_seconds = median_call_seconds(baseline_cluster_assign, 5, 0.0);
  const double n = static_cast<double>(pixels);
  out.decode_pixels_per_second = out.decode_seconds > 0.0 ? n / out.decode_seconds : 0.0;
  out.baseline_pixels_per_second = out.baseline_seconds > 0.0 ? n / out.baseline_seconds : 0.0;
  out.ratio = out.decode_seconds > 0.0 ? out.baseline_seconds / out.decode_seconds : 0.0;
  return out;
}

ScalingReport scaling_report(const std::vector<std::size_t>& pixels, const std::vector<double>& seconds) {
  if (pixels.size() != seconds.size() || pixels.empty()) throw std::invalid_argument("scaling_report: size mismatch");
  ScalingReport out;
  out.pixels = pixels;
  out.seconds = seconds;
  for (std::size_t i = 0; i < pixels.size(); ++i) out.seconds_per_pixel.push_back(seconds[i] / static_cast<double>(pixels[i]));
  const auto [lo, hi] = std::minmax_element(out.seconds_per_pixel.begin(), out.seconds_per_pixel.end());
  out.slope_ratio = *lo > 0.0 ? *hi / *lo : 0.0;
  return out;
}

}  // namespace unilift::metrics
