#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rwre/dirichlet.hpp"
#include "rwre/environment.hpp"
#include "rwre/errors.hpp"
#include "rwre/green.hpp"
#include "rwre/lattice.hpp"
#include "rwre/parallel.hpp"
#include "rwre/rng.hpp"
#include "rwre/walk.hpp"

namespace rwre {

// ------------------------- auxiliary (Kalikow) kernel -------------------------
//
// w_hat(z, z + e) = E[ G_U(z0, z) w(z, z+e) ] / E[ G_U(z0, z) ], the
// Green-weighted annealed kernel.  Both expectations are estimated from the
// same environment samples, so the ratio rows sum to one identically and the
// standard errors come from the delta method for a ratio of correlated means.

struct KalikowSiteRow {
  Site site;
  double mean_weight = 0.0;                      // sample mean of G(z0, z)
  std::array<double, kMaxDirections> kernel{};   // w_hat(z, z + e_dir)
  std::array<double, kMaxDirections> kernel_se{};
  std::array<double, kMaxDim> drift{};           // w_hat(+e_a) - w_hat(-e_a)
  std::array<double, kMaxDim> drift_se{};
};

struct KalikowEstimate {
  FiniteDomain domain;
  Site z0;
  double delta = 0.0;
  std::int64_t samples = 0;
  std::vector<KalikowSiteRow> rows;  // indexed like domain.interior()

  double row_sum(int site_index) const {
    const KalikowSiteRow& r = rows[site_index];
    double s = 0.0;
    for (int dir = 0; dir < 2 * domain.dim(); ++dir) s += r.kernel[dir];
    return s;
  }
};

// Variance of a ratio R = X/Y of sample means via the delta method:
// Var(R) ~ (Sxx - 2 R Sxy + R^2 Syy) / (n ybar^2).
inline double ratio_variance(double sxx, double sxy, double syy, double r, double ybar,
                             std::int64_t n) {
  double v = (sxx - 2.0 * r * sxy + r * r * syy) / (static_cast<double>(n) * ybar * ybar);
  return std::max(v, 0.0);
}

inline KalikowEstimate estimate_kalikow(const WeightVector& w, const FiniteDomain& domain,
                                        const Site& z0, double delta, std::int64_t samples,
                                        std::uint64_t seed, int workers = 0) {
  validate_delta(delta);
  if (domain.dim() != w.dim()) throw WrongDimension("domain and weights disagree on dimension");
  if (domain.interior_index(z0) < 0) throw Error("z0 must be an interior site");
  if (samples < 2) throw Error("estimate_kalikow needs at least 2 samples");
  const int n = static_cast<int>(domain.interior().size());
  const int dirs = w.directions();
  const int stride = 1 + dirs;  // per site: G(z0,z), then G(z0,z) * w(z, z+e)
  std::vector<double> draws(static_cast<std::size_t>(samples) * n * stride);
  parallel_for(samples, workers, [&](std::int64_t s) {
    EnvironmentView view(split_seed(seed, static_cast<std::uint64_t>(s)), w);
    EnvTable env = materialize(view, domain);
    Eigen::VectorXd g = green_row(env, delta, z0);
    double* slot = draws.data() + static_cast<std::size_t>(s) * n * stride;
    for (int z = 0; z < n; ++z) {
      const SimplexPoint& kernel = env.at_index(z);
      slot[z * stride] = g[z];
      for (int dir = 0; dir < dirs; ++dir) slot[z * stride + 1 + dir] = g[z] * kernel[dir];
    }
  });

  KalikowEstimate out;
  out.domain = domain;
  out.z0 = z0;
  out.delta = delta;
  out.samples = samples;
  out.rows.resize(n);
  // moments accumulated in sample order, one site at a time, so the result is
  // identical no matter how many workers produced the draws
  std::vector<double> mean(stride), cov(static_cast<std::size_t>(stride) * stride);
  for (int z = 0; z < n; ++z) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::int64_t s = 0; s < samples; ++s) {
      const double* slot = draws.data() + (static_cast<std::size_t>(s) * n + z) * stride;
      for (int k = 0; k < stride; ++k) mean[k] += slot[k];
    }
    for (int k = 0; k < stride; ++k) mean[k] /= static_cast<double>(samples);
    std::fill(cov.begin(), cov.end(), 0.0);
    for (std::int64_t s = 0; s < samples; ++s) {
      const double* slot = draws.data() + (static_cast<std::size_t>(s) * n + z) * stride;
      for (int k = 0; k < stride; ++k)
        for (int l = k; l < stride; ++l)
          cov[k * stride + l] += (slot[k] - mean[k]) * (slot[l] - mean[l]);
    }
    for (int k = 0; k < stride; ++k)
      for (int l = k; l < stride; ++l) {
        cov[k * stride + l] /= static_cast<double>(samples - 1);
        cov[l * stride + k] = cov[k * stride + l];
      }

    KalikowSiteRow& row = out.rows[z];
    row.site = domain.interior()[z];
    row.mean_weight = mean[0];
    if (!(mean[0] > 0.0))
      throw DegenerateNormalizer("mean Green weight vanished; kernel undefined here");
    for (int dir = 0; dir < dirs; ++dir) {
      double r = mean[1 + dir] / mean[0];
      row.kernel[dir] = r;
      row.kernel_se[dir] = std::sqrt(ratio_variance(cov[(1 + dir) * stride + 1 + dir],
                                                    cov[(1 + dir) * stride], cov[0], r, mean[0],
                                                    samples));
    }
    for (int a = 0; a < w.dim(); ++a) {
      int p = 1 + a, q = 1 + a + w.dim();
      double num = mean[p] - mean[q];
      double r = num / mean[0];
      row.drift[a] = r;
      // delta method for (X_p - X_q)/Y
      double sxx = cov[p * stride + p] - 2.0 * cov[p * stride + q] + cov[q * stride + q];
      double sxy = cov[p * stride] - cov[q * stride];
      row.drift_se[a] = std::sqrt(ratio_variance(sxx, sxy, cov[0], r, mean[0], samples));
    }
  }
  return out;
}

// ------------------------- kernel and drift bounds -------------------------

struct BoundInterval {
  double lo = 0.0;
  double hi = 1.0;
  bool vacuous = false;  // total weight below 1: the argument gives nothing
};

// Per-direction a priori bounds on the auxiliary kernel:
// (alpha_i - 1)/(gamma - 1) <= w_hat_i <= alpha_i/(gamma - 1), clipped to
// [0, 1].  They hold for every domain, z0 and delta.  gamma = 1 degenerates
// the normalizer; gamma < 1 flips the inequalities into nothing.
inline std::vector<BoundInterval> prop2_bounds(const WeightVector& w) {
  double gamma = w.gamma();
  if (gamma == 1.0) throw DegenerateNormalizer("kernel bounds degenerate at total weight 1");
  std::vector<BoundInterval> out(w.directions());
  for (int dir = 0; dir < w.directions(); ++dir) {
    BoundInterval& b = out[dir];
    if (gamma < 1.0) {
      b.vacuous = true;
      continue;
    }
    b.lo = std::clamp((w.alpha(dir) - 1.0) / (gamma - 1.0), 0.0, 1.0);
    b.hi = std::clamp(w.alpha(dir) / (gamma - 1.0), 0.0, 1.0);
  }
  return out;
}

struct DriftBox {
  int dim = 0;
  std::array<double, kMaxDim> lo{};
  std::array<double, kMaxDim> hi{};
  bool vacuous = false;
  bool excludes_zero = false;  // some axis interval misses 0: uniform drift

  bool contains(std::span<const double> v) const {
    for (int a = 0; a < dim; ++a)
      if (v[a] < lo[a] || v[a] > hi[a]) return false;
    return true;
  }
};

// Axis-aligned box trapping every auxiliary-kernel drift component:
// (alpha_{+a} - alpha_{-a} - 1)/(gamma - 1) <= w_hat_{+a} - w_hat_{-a}
// <= (alpha_{+a} - alpha_{-a} + 1)/(gamma - 1).  The box misses the origin
// exactly when some direction satisfies the transience condition, which is
// what makes the walk ballistic.
inline DriftBox theorem1_drift_box(const WeightVector& w) {
  double gamma = w.gamma();
  if (gamma == 1.0) throw DegenerateNormalizer("drift box degenerate at total weight 1");
  DriftBox box;
  box.dim = w.dim();
  if (gamma < 1.0) {
    box.vacuous = true;
    for (int a = 0; a < box.dim; ++a) {
      box.lo[a] = -1.0;
      box.hi[a] = 1.0;
    }
    return box;
  }
  for (int a = 0; a < box.dim; ++a) {
    double diff = w.alpha(a) - w.alpha(a + box.dim);
    box.lo[a] = std::max((diff - 1.0) / (gamma - 1.0), -1.0);
    box.hi[a] = std::min((diff + 1.0) / (gamma - 1.0), 1.0);
    if (box.lo[a] > 0.0 || box.hi[a] < 0.0) box.excludes_zero = true;
  }
  return box;
}

// ------------------------- perturbative velocity expansion -------------------------

struct ExpansionReport {
  int dim = 0;
  double gamma = 0.0;
  HomogeneousKernel kernel;
  double green_origin = 0.0;                // G^m(0, 0) on all of Z^d
  std::array<double, kMaxDim> center{};     // d_m * (1 - (G-1)/(gamma-1))
  double eta_over_gamma = 0.0;              // 2 d eta_m / gamma
  bool precondition_ok = false;             // strict: 2 d eta_m / gamma < 1
  std::optional<double> error_bound;        // 16 (d/gamma)^2 eta^2 / (1 - 2 d eta/gamma)

  std::span<const double> center_span() const {
    return std::span<const double>(center.data(), dim);
  }
};

// First-order ballistic velocity prediction around the large-gamma limit,
// with the explicit remainder bound.  The bound only certifies anything when
// the (strict) smallness condition holds; the center is reported regardless.
inline ExpansionReport expansion_velocity(const WeightVector& w) {
  ExpansionReport rep;
  rep.dim = w.dim();
  rep.gamma = w.gamma();
  if (rep.gamma <= 1.0)
    throw DegenerateNormalizer("expansion needs total weight above 1");
  rep.kernel = homogeneous_stats(w);
  rep.green_origin = green_fourier_origin(rep.kernel);
  double factor = 1.0 - (rep.green_origin - 1.0) / (rep.gamma - 1.0);
  for (int a = 0; a < rep.dim; ++a) rep.center[a] = rep.kernel.drift[a] * factor;
  rep.eta_over_gamma = 2.0 * rep.dim * rep.kernel.eta_m / rep.gamma;
  rep.precondition_ok = rep.eta_over_gamma < 1.0;
  if (rep.precondition_ok) {
    double de = static_cast<double>(rep.dim) / rep.gamma * rep.kernel.eta_m;
    rep.error_bound = 16.0 * de * de / (1.0 - rep.eta_over_gamma);
  }
  return rep;
}

struct Consistency1d {
  double center = 0.0;
  double exact = 0.0;
  double diff = 0.0;
};

// In one dimension the expansion center collapses to the exact ballistic
// velocity: G^m(0,0) = 1/|m_+ - m_-| turns the center into
// (gamma d_m -+ 1)/(gamma - 1), which is the closed-form velocity.
inline Consistency1d expansion_consistency_1d(const WeightVector& w) {
  if (w.dim() != 1) throw WrongDimension("consistency check is one-dimensional");
  if (!theorem1_condition(w)) throw WrongRegime("consistency check needs a ballistic weight");
  ExpansionReport rep = expansion_velocity(w);
  Consistency1d out;
  out.center = rep.center[0];
  out.exact = exact_velocity_1d(w);
  out.diff = std::abs(out.center - out.exact);
  return out;
}

}  // namespace rwre
