#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace unilift::metrics {

// Median over `repeats` samples of the per-call wall time. Each sample loops the
// call until at least `min_sample_seconds` have elapsed, so fast calls are measurable.
double median_call_seconds(const std::function<void()>& fn, int repeats = 5, double min_sample_seconds = 0.0);

struct TimingComparison {
  std::size_t pixels = 0;
  double decode_seconds = 0.0;
  double baseline_seconds = 0.0;
  double decode_pixels_per_second = 0.0;
  double baseline_pixels_per_second = 0.0;
  double ratio = 0.0;  // baseline / decode; > 1 means the decoder is faster
};

// Both callables must label the same rendered maps.
TimingComparison timing_compare(const std::function<void()>& single_stage_decode,
                                const std::function<void()>& baseline_cluster_assign, std::size_t pixels);

struct ScalingReport {
  std::vector<std::size_t> pixels;
  std::vector<double> seconds;
  std::vector<double> seconds_per_pixel;
  double slope_ratio = 0.0;  // max / min per-pixel cost; 1 is perfectly linear
};

ScalingReport scaling_report(const std::vector<std::size_t>& pixels, const std::vector<double>& seconds);

}  // namespace unilift::metrics
