#pragma once

#include <cstddef>

namespace stst::detail {

// Welford accumulator.
struct RunningMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }

  double sample_variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }
};

}  // namespace stst::detail
