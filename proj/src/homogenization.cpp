#include "ihom/homogenization.hpp"

#include <cmath>

#include "ihom/parallel.hpp"

namespace ihom {

template <typename T>
Homogenizer<T>::Homogenizer(IVec3 reso, const BaseMaterial& mat, double penal,
                            const SolverOptions& opts)
    : hier_(GridLevel(reso), mat, penal), opts_(opts), penal_(penal) {
  for (auto& u : u_) u = NodalField(hier_.level(0).grid);
}

template <typename T>
void Homogenizer<T>::set_density(const DensityField& rho_phys) {
  rho_ = rho_phys;
  hier_.set_density(rho_phys);
  density_set_ = true;
}

template <typename T>
CellSolveStats Homogenizer<T>::solve_cell_problems() {
  if (!density_set_) throw std::logic_error("set_density before solve_cell_problems");
  Level<T>& l0 = hier_.level(0);
  NodalField f(l0.grid);
  CellSolveStats out;
  for (int i = 0; i < kNumLoadCases; ++i) {
    macro_force_kernel<T>(l0.grid, hier_.tables(), l0.coeff.data(), i, f.a.data());
    const SolveStats s = hier_.solve(f, u_[std::size_t(i)], opts_);
    out.total_cycles += s.cycles;
    if (s.rel_residual >= out.worst_residual) {
      out.worst_residual = s.rel_residual;
      out.worst_load = i;
    }
    if (!s.converged) out.converged = false;
  }
  return out;
}

namespace {

// chi^i at the 8 local corners, 24 entries per load case.
struct ChiTable {
  double chi[6][24];
  ChiTable() {
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 8; ++j) {
        const Eigen::Vector3d x = macro_strain_displacement(i, local_vertex_offset(j));
        for (int c = 0; c < 3; ++c) chi[i][3 * j + c] = x[c];
      }
  }
};

}  // namespace

template <typename T>
ElasticTensor Homogenizer<T>::effective_tensor() const {
  static const ChiTable chi;
  const Level<T>& l0 = hier_.level(0);
  const GridLevel& g = l0.grid;
  const std::int64_t m = g.element_count();
  const Eigen::Matrix<double, 24, 24>& k0 = hier_.element_stiffness().k0;

  constexpr std::int64_t kBlock = 512;
  const std::int64_t nb = (m + kBlock - 1) / kBlock;
  std::vector<std::array<double, 21>> partial(static_cast<std::size_t>(nb));

  parallel_for(nb, [&](std::int64_t blk) {
    std::array<double, 21> acc{};
    const std::int64_t lo = blk * kBlock;
    const std::int64_t hi = std::min(m, lo + kBlock);
    Eigen::Matrix<double, 24, 6> d;
    Eigen::Matrix<double, 24, 6> kd;
    for (std::int64_t ei = lo; ei < hi; ++ei) {
      const IVec3 e = element_at(ei, g);
      const auto verts = element_vertices(e, g);
      for (int j = 0; j < 8; ++j) {
        const std::int64_t loc = color_block_location(verts[j], g);
        for (int i = 0; i < 6; ++i) {
          const double* uu = u_[std::size_t(i)].at(loc);
          for (int c = 0; c < 3; ++c) {
            const double uval =
                std::is_same_v<T, float> ? double(float(uu[c])) : uu[c];
            d(3 * j + c, i) = chi.chi[i][3 * j + c] - uval;
          }
        }
      }
      kd = k0 * d;
      const double q = std::pow(rho_[ei], penal_);
      int idx = 0;
      for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j, ++idx) acc[std::size_t(idx)] += q * d.col(i).dot(kd.col(j));
    }
    partial[std::size_t(blk)] = acc;
  });

  std::array<double, 21> total{};
  for (std::int64_t b = 0; b < nb; ++b)
    for (int k = 0; k < 21; ++k) total[std::size_t(k)] += partial[std::size_t(b)][std::size_t(k)];

  ElasticTensor out;
  int idx = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j, ++idx) {
      out.c(i, j) = total[std::size_t(idx)] / double(m);
      out.c(j, i) = out.c(i, j);
    }
  return out;
}

template <typename T>
DensityField Homogenizer<T>::tensor_sensitivity(const Matrix6& seed) const {
  static const ChiTable chi;
  const Level<T>& l0 = hier_.level(0);
  const GridLevel& g = l0.grid;
  const std::int64_t m = g.element_count();
  const Eigen::Matrix<double, 24, 24>& k0 = hier_.element_stiffness().k0;
  const Matrix6 s = 0.5 * (seed + seed.transpose());

  DensityField out(rho_.n);
  parallel_for(m, [&](std::int64_t ei) {
    const IVec3 e = element_at(ei, g);
    const auto verts = element_vertices(e, g);
    Eigen::Matrix<double, 24, 6> d;
    for (int j = 0; j < 8; ++j) {
      const std::int64_t loc = color_block_location(verts[j], g);
      for (int i = 0; i < 6; ++i) {
        const double* uu = u_[std::size_t(i)].at(loc);
        for (int c = 0; c < 3; ++c) {
          const double uval = std::is_same_v<T, float> ? double(float(uu[c])) : uu[c];
          d(3 * j + c, i) = chi.chi[i][3 * j + c] - uval;
        }
      }
    }
    const Eigen::Matrix<double, 24, 6> kd = k0 * d;
    double acc = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) acc += s(i, j) * d.col(i).dot(kd.col(j));
    out[ei] = penal_ * std::pow(rho_[ei], penal_ - 1.0) * acc / double(m);
  });
  return out;
}

template class Homogenizer<float>;
template class Homogenizer<double>;

}  // namespace ihom
