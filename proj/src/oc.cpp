#include "ihom/oc.hpp"

#include <cmath>
#include <stdexcept>

#include "ihom/parallel.hpp"

namespace ihom {

namespace {

constexpr double kSensFloor = 1e-30;  // guards ascent-direction sensitivities

void oc_trial(const DensityField& rho, const std::vector<double>& b0, const OCConfig& cfg,
              double lambda, DensityField& out) {
  const double damp = cfg.damp;
  const double step = cfg.step_limit;
  parallel_for(rho.size(), [&](std::int64_t i) {
    double x = rho[i] * std::pow(b0[std::size_t(i)] / lambda, damp);
    x = std::clamp(x, rho[i] - step, rho[i] + step);
    out[i] = std::clamp(x, cfg.min_density, 1.0);
  });
}

}  // namespace

OCResult oc_update(const DensityField& rho, const DensityField& sens, const OCConfig& cfg) {
  if (rho.n != sens.n) throw std::invalid_argument("sensitivity resolution mismatch");
  for (const double g : sens.v)
    if (!std::isfinite(g)) throw std::invalid_argument("non-finite sensitivity");

  // Normalize by the largest descent magnitude so the bisection bracket is
  // scale-free: rescaling the sensitivity by a positive constant then yields
  // the identical update.
  std::vector<double> b0(std::size_t(rho.size()));
  double scale = kSensFloor;
  for (std::int64_t i = 0; i < rho.size(); ++i)
    scale = std::max(scale, std::max(kSensFloor, -sens[i]));
  parallel_for(rho.size(), [&](std::int64_t i) {
    b0[std::size_t(i)] = std::max(kSensFloor, -sens[i]) / scale;
  });

  OCResult res;
  res.rho = DensityField(rho.n);

  const double lo0 = 1e-12, hi0 = 1e12;
  oc_trial(rho, b0, cfg, lo0, res.rho);
  const double mean_lo = field_mean(res.rho);
  if (cfg.volume >= mean_lo) {  // even the maximal move stays at or under target
    res.lambda = lo0 * scale;
    res.bisection_ok = std::abs(mean_lo - cfg.volume) <= cfg.bisect_tol;
    return res;
  }
  oc_trial(rho, b0, cfg, hi0, res.rho);
  const double mean_hi = field_mean(res.rho);
  if (cfg.volume <= mean_hi) {  // cannot shrink below target within the step limit
    res.lambda = hi0 * scale;
    res.bisection_ok = std::abs(mean_hi - cfg.volume) <= cfg.bisect_tol;
    return res;
  }

  // mean(lambda) is non-increasing; geometric bisection across the bracket.
  double lo = lo0, hi = hi0, lambda = lo0;
  for (int it = 0; it < 60; ++it) {
    lambda = std::sqrt(lo * hi);
    oc_trial(rho, b0, cfg, lambda, res.rho);
    const double mean = field_mean(res.rho);
    if (std::abs(mean - cfg.volume) <= cfg.bisect_tol) {
      res.lambda = lambda * scale;
      return res;
    }
    (mean > cfg.volume ? lo : hi) = lambda;
  }
  res.lambda = lambda * scale;
  res.bisection_ok = std::abs(field_mean(res.rho) - cfg.volume) <= cfg.bisect_tol;
  return res;
}

DensityField sensitivity_filter(const DensityField& sens, const DensityField& rho,
                                double radius) {
  if (radius < 1.0) return sens;
  const GridLevel g(sens.n);
  const int r = int(std::floor(radius));
  struct Tap {
    int d[3];
    double w;
  };
  std::vector<Tap> taps;
  for (int dz = -r; dz <= r; ++dz)
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        const double dist = std::sqrt(double(dx * dx + dy * dy + dz * dz));
        const double w = radius - dist;
        if (w > 0.0) taps.push_back({{dx, dy, dz}, w});
      }
  double wsum = 0.0;
  for (const auto& t : taps) wsum += t.w;

  DensityField out(sens.n);
  parallel_for(sens.size(), [&](std::int64_t i) {
    const IVec3 e = element_at(i, g);
    double acc = 0.0;
    for (const auto& t : taps) {
      const IVec3 q = wrap_element({e[0] + t.d[0], e[1] + t.d[1], e[2] + t.d[2]}, g);
      const std::int64_t k = element_index(q, g);
      acc += t.w * rho[k] * sens[k];
    }
    out[i] = acc / (std::max(rho[i], kRhoMin) * wsum);
  });
  return out;
}

}  // namespace ihom
