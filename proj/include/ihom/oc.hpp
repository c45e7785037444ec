#pragma once

#include <algorithm>
#include <cmath>

#include "ihom/density.hpp"

namespace ihom {

struct OCConfig {
  double min_density = kRhoMin;
  double step_limit = 0.05;
  double damp = 0.5;
  double volume = 0.3;
  double bisect_tol = 1e-6;  // on mean density
};

struct OCResult {
  DensityField rho;
  double lambda = 0.0;
  bool bisection_ok = true;
};

// Optimality-criteria update: rho' = clamp(rho * B^damp) within the step
// trust region and the box [min_density, 1], with B = max(eps, -g) / lambda
// and lambda bisected so that mean(rho') matches the volume target.
OCResult oc_update(const DensityField& rho, const DensityField& sens, const OCConfig& cfg);

// Classic sensitivity filter with linear cone weights and periodic wrap.
DensityField sensitivity_filter(const DensityField& sens, const DensityField& rho,
                                double radius);

// Stops when the relative objective change stays below the threshold for
// the required number of consecutive iterations.
class ConvergeChecker {
 public:
  explicit ConvergeChecker(double threshold = 5e-4, int required = 3)
      : threshold_(threshold), required_(required) {}

  bool update(double f) {
    if (has_prev_) {
      const double rel = std::abs(f - prev_) / std::max(std::abs(prev_), 1e-12);
      hits_ = rel < threshold_ ? hits_ + 1 : 0;
    }
    prev_ = f;
    has_prev_ = true;
    return hits_ >= required_;
  }

  void reset() {
    hits_ = 0;
    has_prev_ = false;
  }

 private:
  double threshold_;
  int required_;
  int hits_ = 0;
  double prev_ = 0.0;
  bool has_prev_ = false;
};

}  // namespace ihom
