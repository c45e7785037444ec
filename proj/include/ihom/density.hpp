#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ihom/grid.hpp"

namespace ihom {

inline constexpr double kRhoMin = 0.001;

// Per-element scalar field on a periodic voxel grid, x-fastest storage.
struct DensityField {
  IVec3 n{0, 0, 0};
  std::vector<double> v;

  DensityField() = default;
  DensityField(IVec3 reso, double fill = 0.0)
      : n(reso), v(std::size_t(reso[0]) * reso[1] * reso[2], fill) {}

  std::int64_t size() const { return std::int64_t(n[0]) * n[1] * n[2]; }
  double& operator[](std::int64_t i) { return v[std::size_t(i)]; }
  double operator[](std::int64_t i) const { return v[std::size_t(i)]; }
};

double field_mean(const DensityField& f);

enum class FilterKernel { linear, spline4 };

// Normalized periodic convolution with a radial kernel; radius is measured
// in element units between cell centers. A radius below 1 reaches no
// neighbor and returns the input unchanged. The kernel is symmetric, so the
// operation is its own adjoint.
DensityField radial_filter(const DensityField& f, double radius, FilterKernel kernel);

// Material-interpolation chain rho_design -> [conv] -> pow(p). eval stores
// the intermediates that backward needs.
class DensityExpr {
 public:
  DensityExpr(std::optional<double> filter_radius, FilterKernel kernel, double exponent)
      : radius_(filter_radius), kernel_(kernel), exponent_(exponent) {}

  static DensityExpr pow_only(double exponent) {
    return DensityExpr(std::nullopt, FilterKernel::linear, exponent);
  }

  DensityField eval(const DensityField& design);
  // Maps d(objective)/d(rho_phys) back to d(objective)/d(rho_design).
  std::vector<double> backward(const std::vector<double>& grad_phys) const;

  double exponent() const { return exponent_; }
  bool has_filter() const { return radius_.has_value(); }

 private:
  std::optional<double> radius_;
  FilterKernel kernel_;
  double exponent_;
  DensityField pre_pow_;  // value entering pow, kept for backward
  bool evaluated_ = false;
};

enum class Symmetry { none, reflect3, reflect6, rotate3 };

// Orbit-average a per-element field under the chosen symmetry group of the
// cube. reflect6 and rotate3 require a cubic resolution.
void symmetrize(std::vector<double>& field, IVec3 n, Symmetry sym);
inline void symmetrize(DensityField& f, Symmetry sym) { symmetrize(f.v, f.n, sym); }

struct TrigInitSpec {
  int basis_n = 2;
  std::uint64_t seed = 0;
  double volume = 0.3;
  double sigmoid_k = 15.0;
};

struct TrigInitResult {
  DensityField field;
  bool fallback = false;  // bisection could not bracket; constant field returned
};

// Random trigonometric initialization: weighted basis evaluated at rotated,
// centered element coordinates, projected through a rescaled sigmoid whose
// offset is bisected until mean(rho) = V (tolerance 1e-4).
TrigInitResult init_trig(const TrigInitSpec& spec, IVec3 reso);

DensityField init_constant(double volume, IVec3 reso);

}  // namespace ihom
