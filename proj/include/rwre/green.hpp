#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rwre/environment.hpp"
#include "rwre/errors.hpp"
#include "rwre/lattice.hpp"
#include "rwre/parallel.hpp"
#include "rwre/rng.hpp"
#include "rwre/walk.hpp"

namespace rwre {

// ------------------------- killed Green operator -------------------------
//
// G_{U,delta}(z, z') = E_z[ sum_{k <= T_U} delta^k 1{X_k = z'} ] with T_U the
// exit time of the interior U.  Computed as the Neumann series of delta*Omega
// by a dense solve of (I - delta*Omega) restricted to U; columns for boundary
// targets follow by one extra application of delta*Omega.

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> killed_system(const EnvTable& env,
                                                                    double delta) {
  const FiniteDomain& dom = env.domain();
  const int n = static_cast<int>(dom.interior().size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    const Site& s = dom.interior()[i];
    const SimplexPoint& w = env.at_index(i);
    for (int dir = 0; dir < 2 * dom.dim(); ++dir) {
      int j = dom.interior_index(neighbor(s, dir));
      if (j >= 0) A(i, j) -= static_cast<Scalar>(delta) * static_cast<Scalar>(w[dir]);
    }
  }
  return A;
}

}  // namespace detail

struct KilledGreenOperator {
  FiniteDomain domain;
  double delta = 0.0;
  Eigen::MatrixXd interior;     // G(z, z'), both interior, indexed like domain.interior()
  Eigen::MatrixXd to_boundary;  // G(z, b), b indexed like domain.boundary()

  // Green value with the boundary-source convention G(b, z') = 0 baked in.
  double entry(const Site& from, const Site& to) const {
    int i = domain.interior_index(from);
    if (i < 0) {
      if (domain.on_boundary(from)) return 0.0;
      throw Error("source site outside the domain");
    }
    int j = domain.interior_index(to);
    if (j >= 0) return interior(i, j);
    int b = domain.boundary_index(to);
    if (b >= 0) return to_boundary(i, b);
    throw Error("target site outside the domain");
  }
};

inline void validate_delta(double delta) {
  if (!(delta > 0.0) || delta > 1.0) throw Error("delta must lie in (0, 1]");
}

// Full killed Green operator of a finite environment.  One LU factorization,
// one iterative-refinement sweep, and a residual gate at 1e-12 (relative to
// the solution scale); negative round-off dust is clamped to zero so the
// operator is entrywise nonnegative like the series it represents.
inline KilledGreenOperator green_killed(const EnvTable& env, double delta) {
  validate_delta(delta);
  const FiniteDomain& dom = env.domain();
  const int n = static_cast<int>(dom.interior().size());
  const int b = static_cast<int>(dom.boundary().size());
  if (n == 0) throw Error("cannot solve on an empty interior");
  Eigen::MatrixXd A = detail::killed_system<double>(env, delta);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::MatrixXd G = lu.solve(Eigen::MatrixXd::Identity(n, n));
  // one refinement pass: G += A^{-1} (I - A G)
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(n, n) - A * G;
  G += lu.solve(R);
  R.noalias() = Eigen::MatrixXd::Identity(n, n) - A * G;
  double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
  if (!G.allFinite() || R.cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw SingularSystem("killed Green solve did not reach tolerance");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (G(i, j) < 0.0) {
        if (G(i, j) < -1e-12 * scale)
          throw SingularSystem("killed Green solve produced a negative value");
        G(i, j) = 0.0;
      }
    }
  }
  KilledGreenOperator op;
  op.domain = dom;
  op.delta = delta;
  op.to_boundary = Eigen::MatrixXd::Zero(n, b);
  for (int j = 0; j < n; ++j) {
    const Site& s = dom.interior()[j];
    const SimplexPoint& w = env.at_index(j);
    for (int dir = 0; dir < 2 * dom.dim(); ++dir) {
      int bi = dom.boundary_index(neighbor(s, dir));
      if (bi >= 0) op.to_boundary.col(bi) += delta * w[dir] * G.col(j);
    }
  }
  op.interior = std::move(G);
  return op;
}

// One row G(source, .) without forming the whole inverse: a single solve of
// the transposed system.  Returned over interior sites only.
inline Eigen::VectorXd green_row(const EnvTable& env, double delta, const Site& source) {
  validate_delta(delta);
  const FiniteDomain& dom = env.domain();
  const int n = static_cast<int>(dom.interior().size());
  int src = dom.interior_index(source);
  if (src < 0) throw Error("source must be an interior site");
  Eigen::MatrixXd At = detail::killed_system<double>(env, delta).transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(At);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[src] = 1.0;
  Eigen::VectorXd y = lu.solve(e);
  y += lu.solve(e - At * y);
  if (!y.allFinite()) throw SingularSystem("killed Green row solve failed");
  for (int i = 0; i < n; ++i)
    if (y[i] < 0.0) y[i] = 0.0;
  return y;
}

// Residual of the return identity delta * sum_k w(z, z+e_k) G(z+e_k, z)
// = G(z,z) - 1 at one interior site (boundary neighbors contribute 0).
inline double return_identity_residual(const KilledGreenOperator& op, const EnvTable& env,
                                       const Site& z) {
  int i = op.domain.interior_index(z);
  if (i < 0) throw Error("return identity needs an interior site");
  const SimplexPoint& w = env.at(z);
  double lhs = 0.0;
  for (int dir = 0; dir < 2 * op.domain.dim(); ++dir) {
    Site nb = neighbor(z, dir);
    int j = op.domain.interior_index(nb);
    if (j >= 0) lhs += op.delta * w[dir] * op.interior(j, i);
  }
  return lhs - (op.interior(i, i) - 1.0);
}

// ------------------------- derivative of the Green function -------------------------

struct DerivativePair {
  double analytic = 0.0;  // delta * G(x1,x2) * G(x3,x4)
  double numeric = 0.0;   // central finite difference in the (x2 -> x3) entry
};

// Checks dG(x1,x4)/dw(x2,x3) = delta G(x1,x2) G(x3,x4) against a central
// finite difference of the *unconstrained* matrix entry (the kernel row at
// x2 is not renormalized).  The perturbed systems are re-solved in long
// double: with step 1e-6 a plain double solve leaves the difference quotient
// with only ~8 good digits, short of what the analytic identity deserves.
// x3 on the boundary is legal and makes both sides exactly zero.
inline DerivativePair green_derivative_check(const EnvTable& env, double delta, const Site& x1,
                                             const Site& x2, const Site& x3, const Site& x4,
                                             double step = 1e-6) {
  const FiniteDomain& dom = env.domain();
  // a derivative only makes sense strictly inside the unit disk of the series
  double d = std::min(delta, 1.0 - 1e-9);
  validate_delta(d);
  if (dom.interior_index(x1) < 0 || dom.interior_index(x2) < 0 || dom.interior_index(x4) < 0)
    throw BadStencil("x1, x2, x4 must be interior sites");
  bool adjacent = false;
  for (int dir = 0; dir < 2 * dom.dim(); ++dir)
    if (neighbor(x2, dir) == x3) adjacent = true;
  if (!adjacent) throw BadStencil("x3 must neighbor x2");
  bool x3_interior = dom.interior_index(x3) >= 0;
  if (!x3_interior && !dom.on_boundary(x3)) throw BadStencil("x3 must lie in the domain closure");

  const int n = static_cast<int>(dom.interior().size());
  const int i1 = dom.interior_index(x1);
  const int i2 = dom.interior_index(x2);
  const int i4 = dom.interior_index(x4);

  Eigen::MatrixXd A = detail::killed_system<double>(env, d);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(n), e4 = Eigen::VectorXd::Zero(n);
  e2[i2] = 1.0;
  e4[i4] = 1.0;
  Eigen::VectorXd col2 = lu.solve(e2);  // G(., x2)
  Eigen::VectorXd col4 = lu.solve(e4);  // G(., x4)
  double g_x3_x4 = x3_interior ? col4[dom.interior_index(x3)] : 0.0;

  DerivativePair out;
  out.analytic = d * col2[i1] * g_x3_x4;

  if (!x3_interior) {
    // the interior system never sees entries into the boundary, so the
    // perturbed solves are bitwise identical and the quotient is exactly 0
    out.numeric = 0.0;
    return out;
  }

  using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  LongMatrix base = detail::killed_system<long double>(env, d);
  const int i3 = dom.interior_index(x3);
  LongVector rhs = LongVector::Zero(n);
  rhs[i4] = 1.0L;
  auto perturbed_g14 = [&](long double h) {
    LongMatrix Ah = base;
    // Omega(x2, x3) grows by h, so the system entry drops by delta * h
    Ah(i2, i3) -= static_cast<long double>(d) * h;
    Eigen::PartialPivLU<LongMatrix> luh(Ah);
    LongVector col = luh.solve(rhs);
    return col[i1];
  };
  long double h = static_cast<long double>(step);
  out.numeric = static_cast<double>((perturbed_g14(h) - perturbed_g14(-h)) / (2.0L * h));
  return out;
}

// ------------------------- homogeneous kernels -------------------------

// Deterministic walk kernel m_i = alpha_i / gamma together with the derived
// quantities used by the symmetrization identity and the velocity expansion.
struct HomogeneousKernel {
  int dim = 0;
  SimplexPoint mean;                      // m over the 2d directions
  std::array<double, kMaxDim> drift{};    // d_m = sum m_i e_i
  double k_m = 0.0;                       // 2 sum_i sqrt(m_{+i} m_{-i})
  double eta_m = 0.0;                     // max over unit steps of phi / (1 - k_m)
  std::array<double, kMaxDim> sym{};      // s_{+i} = s_{-i}, normalized
  std::array<double, kMaxDim> log_ratio{} ;  // log(m_{+i} / m_{-i}) per axis

  // phi(z) = prod_i sqrt(m_{+i}/m_{-i})^{z_i}
  double phi(const Site& z) const {
    double lg = 0.0;
    for (int a = 0; a < dim; ++a) lg += 0.5 * log_ratio[a] * static_cast<double>(z.c[a]);
    return std::exp(lg);
  }

  SimplexPoint sym_point() const {
    std::array<double, kMaxDirections> p{};
    for (int a = 0; a < dim; ++a) p[a] = p[a + dim] = sym[a];
    return SimplexPoint(2 * dim, std::span<const double>(p.data(), 2 * dim));
  }
};

inline HomogeneousKernel homogeneous_stats(const WeightVector& w) {
  HomogeneousKernel k;
  k.dim = w.dim();
  std::array<double, kMaxDirections> m{};
  for (int i = 0; i < w.directions(); ++i) m[i] = w.mean(i);
  k.mean = SimplexPoint(w.directions(), std::span<const double>(m.data(), w.directions()));
  double ratio_max = 0.0;
  for (int a = 0; a < k.dim; ++a) {
    double mp = m[a], mm = m[a + k.dim];
    k.drift[a] = mp - mm;
    double root = std::sqrt(mp * mm);
    k.k_m += 2.0 * root;
    k.log_ratio[a] = std::log(mp / mm);
    double r = std::sqrt(mp / mm);
    ratio_max = std::max(ratio_max, std::max(r, 1.0 / r));
  }
  double one_minus = 1.0 - k.k_m;
  // eta is infinite for a centered kernel (k_m = 1); keep the arithmetic
  // honest and let callers gate on k_m
  k.eta_m = ratio_max / one_minus;
  for (int a = 0; a < k.dim; ++a)
    k.sym[a] = std::sqrt(m[a] * m[a + k.dim]) / k.k_m;
  return k;
}

// ------------------------- Green value at the origin -------------------------

// G^m(0,0) for the homogeneous walk on all of Z^d, by the torus integral
// (2pi)^-d int dtheta / (1 - 2 sum_i sqrt(m_{+i} m_{-i}) cos theta_i).
// Periodic trapezoid sums, node count doubled from 64 per axis until the
// value moves by < 1e-12.  Divergent (k_m >= 1 in d <= 2) or stubborn
// integrals surface as NonConvergent.
inline double green_fourier_origin(const HomogeneousKernel& kernel) {
  const int d = kernel.dim;
  if (kernel.k_m >= 1.0 && d <= 2)
    throw NonConvergent("Green value at the origin diverges for centered kernels in d <= 2");
  std::array<double, kMaxDim> c{};
  for (int a = 0; a < d; ++a)
    c[a] = 2.0 * std::sqrt(kernel.mean[a] * kernel.mean[a + d]);
  const int cap = d == 1 ? (1 << 20) : (d == 2 ? 8192 : 1024);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int nodes = 64; nodes <= cap; nodes *= 2) {
    std::vector<double> cosv(nodes);
    for (int i = 0; i < nodes; ++i)
      cosv[i] = std::cos(2.0 * M_PI * static_cast<double>(i) / nodes);
    double sum = 0.0;
    if (d == 1) {
      for (int i = 0; i < nodes; ++i) sum += 1.0 / (1.0 - c[0] * cosv[i]);
      sum /= nodes;
    } else if (d == 2) {
      for (int i = 0; i < nodes; ++i) {
        double base = 1.0 - c[0] * cosv[i];
        for (int j = 0; j < nodes; ++j) sum += 1.0 / (base - c[1] * cosv[j]);
      }
      sum /= static_cast<double>(nodes) * nodes;
    } else {
      for (int i = 0; i < nodes; ++i) {
        double bi = 1.0 - c[0] * cosv[i];
        for (int j = 0; j < nodes; ++j) {
          double bij = bi - c[1] * cosv[j];
          for (int l = 0; l < nodes; ++l) sum += 1.0 / (bij - c[2] * cosv[l]);
        }
      }
      sum /= std::pow(static_cast<double>(nodes), 3);
    }
    if (std::isfinite(prev) && std::abs(sum - prev) < 1e-12) return sum;
    prev = sum;
  }
  throw NonConvergent("torus quadrature did not stabilize within the node budget");
}

struct SeriesValue {
  double value = 0.0;       // sum_{n <= horizon} P^m(X_n = 0)
  double tail_bound = 0.0;  // k_m^horizon / (1 - k_m), rigorous remainder bound
  std::int64_t horizon = 0;
};

// Independent route to G^m(0,0): partial sums of the return probabilities.
// P^m(X_n = 0) is evaluated exactly (in log space) as the multinomial sum
// over per-axis round-trip counts; P^m(X_n=0) <= k_m^n gives the geometric
// tail bound.  horizon < 0 picks the smallest horizon with tail < 1e-10.
inline SeriesValue green_series_origin(const HomogeneousKernel& kernel,
                                       std::int64_t horizon = -1) {
  const int d = kernel.dim;
  if (kernel.k_m >= 1.0)
    throw NonConvergent("return-probability series needs k_m < 1");
  SeriesValue out;
  if (horizon < 0) {
    double target = 1e-10 * (1.0 - kernel.k_m);
    horizon = static_cast<std::int64_t>(std::ceil(std::log(target) / std::log(kernel.k_m)));
    horizon = std::max<std::int64_t>(horizon, 1);
  }
  out.horizon = horizon;
  out.tail_bound = std::pow(kernel.k_m, static_cast<double>(horizon)) / (1.0 - kernel.k_m);
  std::vector<double> lf(horizon + 1);  // log n!
  lf[0] = 0.0;
  for (std::int64_t n = 1; n <= horizon; ++n) lf[n] = lf[n - 1] + std::log(static_cast<double>(n));
  std::array<double, kMaxDim> lq{};
  for (int a = 0; a < d; ++a)
    lq[a] = std::log(kernel.mean[a] * kernel.mean[a + d]);
  double total = 1.0;  // n = 0 term
  for (std::int64_t n = 2; n <= horizon; n += 2) {
    std::int64_t half = n / 2;
    double pn = 0.0;
    if (d == 1) {
      pn = std::exp(lf[n] - 2.0 * lf[half] + half * lq[0]);
    } else if (d == 2) {
      for (std::int64_t k1 = 0; k1 <= half; ++k1) {
        std::int64_t k2 = half - k1;
        pn += std::exp(lf[n] - 2.0 * (lf[k1] + lf[k2]) + k1 * lq[0] + k2 * lq[1]);
      }
    } else {
      for (std::int64_t k1 = 0; k1 <= half; ++k1)
        for (std::int64_t k2 = 0; k2 + k1 <= half; ++k2) {
          std::int64_t k3 = half - k1 - k2;
          pn += std::exp(lf[n] - 2.0 * (lf[k1] + lf[k2] + lf[k3]) + k1 * lq[0] + k2 * lq[1] +
                         k3 * lq[2]);
        }
    }
    total += pn;
  }
  out.value = total;
  return out;
}

// ------------------------- symmetrization identity -------------------------

// Max entrywise deviation of G^m_delta from M_phi^{-1} G^s_{delta k_m} M_phi
// on a finite box, both sides solved with boundary killing.  The conjugation
// is exact, so this should only differ by floating-point noise.
inline double symmetrize_check(const HomogeneousKernel& kernel, double delta,
                               const FiniteDomain& box) {
  validate_delta(delta);
  if (box.dim() != kernel.dim) throw WrongDimension("box dimension mismatch");
  EnvTable env_m = constant_environment(box, kernel.mean);
  EnvTable env_s = constant_environment(box, kernel.sym_point());
  KilledGreenOperator gm = green_killed(env_m, delta);
  KilledGreenOperator gs = green_killed(env_s, delta * kernel.k_m);
  const int n = static_cast<int>(box.interior().size());
  const int b = static_cast<int>(box.boundary().size());
  std::vector<double> phi_int(n), phi_bd(b);
  for (int i = 0; i < n; ++i) phi_int[i] = kernel.phi(box.interior()[i]);
  for (int i = 0; i < b; ++i) phi_bd[i] = kernel.phi(box.boundary()[i]);
  double dev = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double rhs = gs.interior(i, j) * phi_int[j] / phi_int[i];
      dev = std::max(dev, std::abs(gm.interior(i, j) - rhs));
    }
    for (int j = 0; j < b; ++j) {
      double rhs = gs.to_boundary(i, j) * phi_bd[j] / phi_int[i];
      dev = std::max(dev, std::abs(gm.to_boundary(i, j) - rhs));
    }
  }
  return dev;
}

// ------------------------- annealed mean of the return Green value -------------------------

struct GreenReturnEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  // The product bound inverse_first_moment^distance, available whenever some
  // direction has alpha > 1; absent otherwise (estimate alone is still valid).
  std::optional<double> bound;
  std::optional<int> bound_direction;
  std::optional<int> bound_distance;
};

// Monte Carlo estimate of E_mu[ G_U(z0, z0) ] at delta = 1 over fresh
// environments, with the closed-form escape-route bound when it applies.
inline GreenReturnEstimate mean_green_return(const WeightVector& w, const FiniteDomain& domain,
                                             const Site& z0, std::int64_t samples,
                                             std::uint64_t seed, int workers = 0) {
  if (domain.interior_index(z0) < 0) throw Error("z0 must be an interior site");
  if (samples < 2) throw Error("mean_green_return needs at least 2 samples");
  const int n = static_cast<int>(domain.interior().size());
  const int iz = domain.interior_index(z0);
  std::vector<double> values(samples);
  parallel_for(samples, workers, [&](std::int64_t s) {
    EnvironmentView view(split_seed(seed, static_cast<std::uint64_t>(s)), w);
    EnvTable env = materialize(view, domain);
    Eigen::MatrixXd A = detail::killed_system<double>(env, 1.0);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[iz] = 1.0;
    Eigen::VectorXd col = lu.solve(e);
    col += lu.solve(e - A * col);
    if (!col.allFinite()) throw SingularSystem("Green solve failed during sampling");
    values[s] = col[iz];
  });
  GreenReturnEstimate out;
  out.samples = samples;
  double sum = 0.0;
  for (double v : values) sum += v;
  double mean = sum / static_cast<double>(samples);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  out.estimate = mean;
  out.std_error = std::sqrt(ss / (static_cast<double>(samples) * (samples - 1.0)));
  // best available escape-route bound: walk straight in a direction with
  // alpha > 1 until the boundary; E[G] <= ((gamma-1)/(alpha-1))^distance
  double best_log = std::numeric_limits<double>::infinity();
  for (int dir = 0; dir < w.directions(); ++dir) {
    auto ifm = inverse_first_moment(w, dir);
    if (!ifm) continue;
    int dist = 0;
    Site s = z0;
    while (domain.interior_index(s) >= 0) {
      s = neighbor(s, dir);
      ++dist;
    }
    double lg = dist * std::log(*ifm);
    if (lg < best_log) {
      best_log = lg;
      out.bound = std::exp(lg);
      out.bound_direction = dir;
      out.bound_distance = dist;
    }
  }
  return out;
}

}  // namespace rwre
