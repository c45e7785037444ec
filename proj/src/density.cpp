#include "ihom/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ihom/parallel.hpp"

namespace ihom {

double field_mean(const DensityField& f) {
  if (f.size() == 0) return 0.0;
  return block_sum(f.size(), [&](std::int64_t i) { return f[i]; }) / double(f.size());
}

namespace {

struct FilterTap {
  int d[3];
  double w;
};

std::vector<FilterTap> kernel_taps(double radius, FilterKernel kernel) {
  std::vector<FilterTap> taps;
  const int r = int(std::floor(radius));
  for (int dz = -r; dz <= r; ++dz)
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        const double dist = std::sqrt(double(dx * dx + dy * dy + dz * dz));
        if (dist > radius) continue;
        double w = 0.0;
        if (kernel == FilterKernel::linear) {
          w = radius - dist;
        } else {
          const double q = 1.0 - (dist / radius) * (dist / radius);
          w = q * q;
        }
        if (w > 0.0) taps.push_back({{dx, dy, dz}, w});
      }
  double total = 0.0;
  for (const auto& t : taps) total += t.w;
  for (auto& t : taps) t.w /= total;
  return taps;
}

}  // namespace

DensityField radial_filter(const DensityField& f, double radius, FilterKernel kernel) {
  if (radius < 1.0) return f;
  const auto taps = kernel_taps(radius, kernel);
  const GridLevel g(f.n);
  DensityField out(f.n);
  parallel_for(f.size(), [&](std::int64_t i) {
    const IVec3 e = element_at(i, g);
    double s = 0.0;
    for (const auto& t : taps) {
      const IVec3 q = wrap_element({e[0] + t.d[0], e[1] + t.d[1], e[2] + t.d[2]}, g);
      s += t.w * f[element_index(q, g)];
    }
    out[i] = s;
  });
  return out;
}

DensityField DensityExpr::eval(const DensityField& design) {
  pre_pow_ = radius_ ? radial_filter(design, *radius_, kernel_) : design;
  evaluated_ = true;
  DensityField out(design.n);
  const double p = exponent_;
  parallel_for(out.size(), [&](std::int64_t i) { out[i] = std::pow(pre_pow_[i], p); });
  return out;
}

std::vector<double> DensityExpr::backward(const std::vector<double>& grad_phys) const {
  if (!evaluated_) throw std::logic_error("DensityExpr::backward before eval");
  DensityField g(pre_pow_.n);
  const double p = exponent_;
  parallel_for(g.size(), [&](std::int64_t i) {
    g[i] = grad_phys[std::size_t(i)] * p * std::pow(pre_pow_[i], p - 1.0);
  });
  if (radius_) g = radial_filter(g, *radius_, kernel_);  // symmetric kernel: adjoint = itself
  return std::move(g.v);
}

namespace {

struct GroupOp {
  int perm[3];
  bool flip[3];
};

int perm_sign(const int p[3]) {
  int s = 1;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (p[i] > p[j]) s = -s;
  return s;
}

std::vector<GroupOp> symmetry_group(Symmetry sym) {
  std::vector<GroupOp> ops;
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  switch (sym) {
    case Symmetry::none:
      ops.push_back({{0, 1, 2}, {false, false, false}});
      break;
    case Symmetry::reflect3:
      for (int m = 0; m < 8; ++m)
        ops.push_back({{0, 1, 2}, {bool(m & 1), bool(m & 2), bool(m & 4)}});
      break;
    case Symmetry::reflect6:
      for (const auto& p : perms)
        for (int m = 0; m < 8; ++m)
          ops.push_back({{p[0], p[1], p[2]}, {bool(m & 1), bool(m & 2), bool(m & 4)}});
      break;
    case Symmetry::rotate3:
      for (const auto& p : perms)
        for (int m = 0; m < 8; ++m) {
          const int nflip = (m & 1) + ((m >> 1) & 1) + ((m >> 2) & 1);
          const int det = perm_sign(p) * ((nflip % 2) ? -1 : 1);
          if (det == 1)
            ops.push_back({{p[0], p[1], p[2]}, {bool(m & 1), bool(m & 2), bool(m & 4)}});
        }
      break;
  }
  return ops;
}

}  // namespace

void symmetrize(std::vector<double>& field, IVec3 n, Symmetry sym) {
  if (sym == Symmetry::none) return;
  if (sym != Symmetry::reflect3 && (n[0] != n[1] || n[1] != n[2]))
    throw std::invalid_argument("reflect6/rotate3 symmetry requires a cubic grid");
  const auto ops = symmetry_group(sym);
  const GridLevel g(n);
  std::vector<double> in = field;
  const double inv = 1.0 / double(ops.size());
  parallel_for(std::int64_t(field.size()), [&](std::int64_t i) {
    const IVec3 e = element_at(i, g);
    double s = 0.0;
    for (const auto& op : ops) {
      IVec3 q{e[op.perm[0]], e[op.perm[1]], e[op.perm[2]]};
      for (int k = 0; k < 3; ++k)
        if (op.flip[k]) q[k] = n[k] - 1 - q[k];
      s += in[std::size_t(element_index(q, g))];
    }
    field[std::size_t(i)] = s * inv;
  });
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d449bd133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based uniform draw in [-1, 1]; reproducible for any worker count.
double uniform_pm1(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ (counter * 0xd1b54a32d192ed03ULL + 1));
  return double(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

}  // namespace

TrigInitResult init_trig(const TrigInitSpec& spec, IVec3 reso) {
  if (spec.basis_n < 1 || spec.basis_n > 8)
    throw std::invalid_argument("trig basis order must be in [1, 8]");
  if (!(spec.volume > kRhoMin && spec.volume <= 1.0))
    throw std::invalid_argument("volume fraction out of range");
  const GridLevel g(reso);
  const std::int64_t m = g.element_count();

  // One weight per basis function of Q_n: the 6n primaries plus all
  // unordered pairwise products.
  const int nt = 6 * spec.basis_n;
  const int nq = nt + nt * (nt + 1) / 2;
  std::vector<double> w(static_cast<std::size_t>(nq));
  for (int j = 0; j < nq; ++j) w[std::size_t(j)] = uniform_pm1(spec.seed, std::uint64_t(j));

  // One global random rotation from a normalized quaternion.
  double q[4];
  double qn = 0.0;
  for (int j = 0; j < 4; ++j) {
    q[j] = uniform_pm1(spec.seed, std::uint64_t(nq + j));
    qn += q[j] * q[j];
  }
  if (qn < 1e-12) {
    q[0] = 1.0;
    q[1] = q[2] = q[3] = 0.0;
    qn = 1.0;
  }
  qn = std::sqrt(qn);
  for (double& c : q) c /= qn;
  const double qw = q[0], qx = q[1], qy = q[2], qz = q[3];
  const double rot[3][3] = {
      {1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qw * qz), 2 * (qx * qz + qw * qy)},
      {2 * (qx * qy + qw * qz), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qw * qx)},
      {2 * (qx * qz - qw * qy), 2 * (qy * qz + qw * qx), 1 - 2 * (qx * qx + qy * qy)}};

  std::vector<double> y(static_cast<std::size_t>(m));
  parallel_for(m, [&](std::int64_t i) {
    const IVec3 e = element_at(i, g);
    double xb[3];
    for (int r = 0; r < 3; ++r) {
      xb[r] = 0.0;
      for (int k = 0; k < 3; ++k)
        xb[r] += rot[r][k] * ((e[k] + 0.5) / double(g.n[k]) - 0.5);
    }
    double t[3 * 2 * 8];  // primaries, nt <= 48 for basis_n <= 8
    for (int ax = 0, j = 0; ax < 3; ++ax)
      for (int k = 1; k <= spec.basis_n; ++k) {
        t[j++] = std::cos(2.0 * M_PI * k * xb[ax]);
        t[j++] = std::sin(2.0 * M_PI * k * xb[ax]);
      }
    double s = 0.0;
    int j = 0;
    for (int a = 0; a < nt; ++a) s += w[std::size_t(j++)] * t[a];
    for (int a = 0; a < nt; ++a)
      for (int b = a; b < nt; ++b) s += w[std::size_t(j++)] * t[a] * t[b];
    y[std::size_t(i)] = s;
  });

  // Rescaled sigmoid projection; the cap keeps the projected range inside
  // [rho_min, 1].
  const double vhat = std::min(1.5 * spec.volume, 1.0 - kRhoMin);
  const double k = spec.sigmoid_k;
  DensityField rho(reso);
  auto project = [&](double mu) {
    parallel_for(m, [&](std::int64_t i) {
      rho[i] = kRhoMin + vhat / (1.0 + std::exp(-k * (y[std::size_t(i)] - mu)));
    });
    return field_mean(rho);
  };

  double ylo = y[0], yhi = y[0];
  for (std::int64_t i = 1; i < m; ++i) {
    ylo = std::min(ylo, y[std::size_t(i)]);
    yhi = std::max(yhi, y[std::size_t(i)]);
  }
  double lo = ylo - 45.0 / k;  // essentially saturated ends
  double hi = yhi + 45.0 / k;
  if (!(project(lo) >= spec.volume && project(hi) <= spec.volume)) {
    TrigInitResult res{init_constant(spec.volume, reso), true};
    return res;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mean = project(mid);
    if (std::abs(mean - spec.volume) <= 1e-4) return {std::move(rho), false};
    (mean > spec.volume ? lo : hi) = mid;
  }
  project(0.5 * (lo + hi));
  if (std::abs(field_mean(rho) - spec.volume) <= 1e-4) return {std::move(rho), false};
  return {init_constant(spec.volume, reso), true};
}

DensityField init_constant(double volume, IVec3 reso) {
  if (!(volume >= kRhoMin && volume <= 1.0))
    throw std::invalid_argument("volume fraction out of range");
  return DensityField(reso, volume);
}

}  // namespace ihom
