#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rwre/rng.hpp"
#include "rwre/simplex.hpp"

namespace rwre {

// ------------------------- sampling and moments -------------------------

// One draw from the Dirichlet law with the given weights: normalized
// independent Gamma(alpha_i) variables.  Entries are clamped away from an
// exact 0 (possible via underflow for tiny shapes) to keep points on the
// open simplex.
inline SimplexPoint sample_dirichlet(const WeightVector& w, RandomStream& rng) {
  std::array<double, kMaxDirections> g{};
  const int n = w.directions();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = rng.next_gamma(w.alpha(i));
    if (v < 1e-300) v = 1e-300;
    g[i] = v;
    sum += v;
  }
  for (int i = 0; i < n; ++i) g[i] /= sum;
  // Renormalization can leave the largest entry a hair above 1 only if the
  // others underflowed; the clamp above prevents that.
  return SimplexPoint(n, std::span<const double>(g.data(), n));
}

// log E[prod_i x_i^{n_i}] under Dirichlet(alpha), via the Gamma-ratio
// closed form.  Exact up to lgamma rounding; safe for large exponents.
inline double dirichlet_log_moment(const WeightVector& w, const MultiIndex& idx) {
  if (idx.size() != w.directions())
    throw Error("multi-index size must match the weight vector");
  double lg = std::lgamma(w.gamma()) - std::lgamma(w.gamma() + idx.total());
  for (int i = 0; i < w.directions(); ++i) {
    if (idx[i] > 0) lg += std::lgamma(w.alpha(i) + idx[i]) - std::lgamma(w.alpha(i));
  }
  return lg;
}

inline double dirichlet_moment(const WeightVector& w, const MultiIndex& idx) {
  return std::exp(dirichlet_log_moment(w, idx));
}

// E[1/x_i] = (gamma-1)/(alpha_i-1) when alpha_i > 1; diverges otherwise
// (the marginal density ~ x^{alpha_i-1} near 0), signalled by nullopt.
inline std::optional<double> inverse_first_moment(const WeightVector& w, int direction) {
  double a = w.alpha(direction);
  if (a <= 1.0) return std::nullopt;
  return (w.gamma() - 1.0) / (a - 1.0);
}

// Cov(x_i, x_j) of the Dirichlet law.
inline double dirichlet_covariance(const WeightVector& w, int i, int j) {
  double mi = w.mean(i);
  if (i == j) return mi * (1.0 - mi) / (w.gamma() + 1.0);
  return -mi * w.mean(j) / (w.gamma() + 1.0);
}

// ------------------------- smooth test functions -------------------------

// A smooth function on the simplex together with its gradient, as needed by
// the integration-by-parts residual.
struct SimplexFunction {
  std::string name;
  std::function<double(std::span<const double>)> value;
  // writes df/dx_k into grad[k], k = 0..n-1
  std::function<void(std::span<const double>, std::span<double>)> gradient;
};

// Monomial prod x_k^{e_k} with analytic gradient.
inline SimplexFunction monomial_function(const MultiIndex& idx) {
  std::string name;
  for (int k = 0; k < idx.size(); ++k) {
    if (idx[k] == 0) continue;
    if (!name.empty()) name += "*";
    name += "x" + std::to_string(k + 1);
    if (idx[k] > 1) name += "^" + std::to_string(idx[k]);
  }
  if (name.empty()) name = "1";
  std::vector<int> e(idx.size());
  for (int k = 0; k < idx.size(); ++k) e[k] = idx[k];
  SimplexFunction f;
  f.name = name;
  f.value = [e](std::span<const double> x) {
    double v = 1.0;
    for (size_t k = 0; k < e.size(); ++k)
      for (int r = 0; r < e[k]; ++r) v *= x[k];
    return v;
  };
  f.gradient = [e](std::span<const double> x, std::span<double> grad) {
    for (size_t k = 0; k < e.size(); ++k) {
      if (e[k] == 0) {
        grad[k] = 0.0;
        continue;
      }
      double v = static_cast<double>(e[k]);
      for (size_t l = 0; l < e.size(); ++l) {
        int p = static_cast<int>(l) == static_cast<int>(k) ? e[l] - 1 : e[l];
        for (int r = 0; r < p; ++r) v *= x[l];
      }
      grad[k] = v;
    }
  };
  return f;
}

// All monomials of total degree <= 3 in the given number of variables.
// This is the named catalog the residual property tests run over.
inline std::vector<SimplexFunction> polynomial_catalog(int directions) {
  std::vector<SimplexFunction> out;
  std::vector<int> e(directions, 0);
  // enumerate exponent tuples with sum <= 3, lexicographically
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == directions) {
      out.push_back(monomial_function(
          MultiIndex(directions, std::span<const int>(e.data(), e.size()))));
      return;
    }
    for (int v = 0; v <= left; ++v) {
      e[pos] = v;
      rec(pos + 1, left - v);
    }
    e[pos] = 0;
  };
  rec(0, 3);
  return out;
}

// ------------------------- Gauss-Jacobi quadrature -------------------------

struct QuadratureRule {
  std::vector<double> nodes;    // in (0,1)
  std::vector<double> weights;  // sum to 1: quadrature against the Beta density
};

// n-point Gauss rule for the Beta(a, b) probability density on (0,1),
// built by Golub-Welsch from the monic Jacobi recurrence.  Exact for
// polynomial integrands of degree <= 2n-1, any a, b > 0.
inline QuadratureRule beta_gauss_rule(double a, double b, int n) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error("beta_gauss_rule needs a, b > 0");
  if (n < 1) throw Error("beta_gauss_rule needs at least one node");
  // Jacobi weight (1-x)^A (1+x)^B on [-1,1] matches Beta(a,b) under
  // t = (1+x)/2 with A = b-1, B = a-1.
  const double A = b - 1.0, B = a - 1.0;
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
  const double apb = A + B;
  diag[0] = (B - A) / (apb + 2.0);
  for (int k = 1; k < n; ++k) {
    double den = (2.0 * k + apb) * (2.0 * k + apb + 2.0);
    diag[k] = (B * B - A * A) / den;
  }
  if (n > 1) {
    sub[0] = std::sqrt(4.0 * (A + 1.0) * (B + 1.0) /
                       ((apb + 2.0) * (apb + 2.0) * (apb + 3.0)));
    for (int k = 2; k < n; ++k) {
      double t = 2.0 * k + apb;
      double beta_k = 4.0 * k * (k + A) * (k + B) * (k + apb) /
                      (t * t * (t + 1.0) * (t - 1.0));
      sub[k - 1] = std::sqrt(beta_k);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NonConvergent("Jacobi eigensolve failed");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double wsum = 0.0;
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = 0.5 * (1.0 + es.eigenvalues()[k]);
    double w0 = es.eigenvectors()(0, k);
    rule.weights[k] = w0 * w0;
    wsum += rule.weights[k];
  }
  // normalized so the rule integrates the *density*: sum w = 1 exactly
  for (double& w : rule.weights) w /= wsum;
  return rule;
}

// Tensor quadrature over the simplex in stick-breaking coordinates:
// Dirichlet(alpha_1..alpha_K) factors into independent Betas
// t_j ~ Beta(alpha_j, alpha_{j+1}+...+alpha_K), x_j = t_j prod_{l<j}(1-t_l).
// Calls visit(x, weight) for every tensor node.
template <typename Visitor>
inline void for_each_simplex_node(const WeightVector& w, int nodes_per_axis, Visitor&& visit) {
  const int K = w.directions();
  std::vector<QuadratureRule> rules;
  rules.reserve(K - 1);
  double tail = w.gamma();
  for (int j = 0; j < K - 1; ++j) {
    tail -= w.alpha(j);
    rules.push_back(beta_gauss_rule(w.alpha(j), tail, nodes_per_axis));
  }
  std::array<double, kMaxDirections> x{};
  std::function<void(int, double, double)> rec = [&](int j, double stick, double weight) {
    if (j == K - 1) {
      x[j] = stick;
      visit(std::span<const double>(x.data(), K), weight);
      return;
    }
    const auto& r = rules[j];
    for (size_t q = 0; q < r.nodes.size(); ++q) {
      x[j] = stick * r.nodes[q];
      rec(j + 1, stick * (1.0 - r.nodes[q]), weight * r.weights[q]);
    }
  };
  rec(0, 1.0, 1.0);
}

// ------------------------- integration by parts -------------------------

struct IbpOptions {
  enum class Mode { quadrature, monte_carlo };
  Mode mode = Mode::quadrature;
  int direction = 0;             // index i of the identity below
  int quad_nodes = 32;           // per stick-breaking axis
  std::int64_t samples = 100000; // MC draws
  std::uint64_t seed = 1;
};

struct IbpResult {
  double lhs = 0.0;       // int f dlambda
  double rhs = 0.0;       // the two right-hand integrals combined
  double residual = 0.0;  // lhs - rhs
  double std_error = 0.0; // 0 in quadrature mode
  std::int64_t samples = 0;
};

namespace detail {

// Residual integrand of the identity
//   int f = (gamma/alpha_i) int x_i f + (1/alpha_i) int x_i (sum_k x_k d_k f - d_i f),
// evaluated pointwise so Monte Carlo can use common draws for both sides.
struct IbpTerms {
  double lhs;
  double rhs;
};

inline IbpTerms ibp_terms(const WeightVector& w, const SimplexFunction& f, int dir,
                          std::span<const double> x, std::span<double> grad_buf) {
  double fx = f.value(x);
  f.gradient(x, grad_buf);
  double radial = 0.0;
  for (int k = 0; k < w.directions(); ++k) radial += x[k] * grad_buf[k];
  double xi = x[dir];
  double rhs = (w.gamma() / w.alpha(dir)) * xi * fx +
               (xi * (radial - grad_buf[dir])) / w.alpha(dir);
  return {fx, rhs};
}

}  // namespace detail

// Residual of the Dirichlet integration-by-parts identity in one chosen
// direction.  Quadrature mode is exact for polynomials (degree <= 3 catalog
// needs ~4 nodes; default 32 covers smooth non-polynomials) and is limited
// to 2d <= 4; Monte Carlo works in any supported dimension and reports the
// standard error of the common-draw residual.
inline IbpResult ibp_residual(const WeightVector& w, const SimplexFunction& f,
                              const IbpOptions& opts) {
  if (opts.direction < 0 || opts.direction >= w.directions())
    throw Error("ibp direction out of range");
  std::array<double, kMaxDirections> grad{};
  std::span<double> grad_span(grad.data(), w.directions());
  IbpResult out;
  if (opts.mode == IbpOptions::Mode::quadrature) {
    if (w.directions() > 4)
      throw Error("quadrature mode supports at most 4 simplex components; use Monte Carlo");
    double lhs = 0.0, rhs = 0.0;
    for_each_simplex_node(w, opts.quad_nodes,
                          [&](std::span<const double> x, double weight) {
                            auto t = detail::ibp_terms(w, f, opts.direction, x, grad_span);
                            lhs += weight * t.lhs;
                            rhs += weight * t.rhs;
                          });
    out.lhs = lhs;
    out.rhs = rhs;
    out.residual = lhs - rhs;
    out.samples = 0;
    return out;
  }
  RandomStream rng(opts.seed);
  double sum = 0.0, sumsq = 0.0, lhs = 0.0, rhs = 0.0;
  for (std::int64_t s = 0; s < opts.samples; ++s) {
    SimplexPoint x = sample_dirichlet(w, rng);
    auto t = detail::ibp_terms(w, f, opts.direction, x.probs(), grad_span);
    double r = t.lhs - t.rhs;
    sum += r;
    sumsq += r * r;
    lhs += t.lhs;
    rhs += t.rhs;
  }
  double n = static_cast<double>(opts.samples);
  double mean = sum / n;
  double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
  out.lhs = lhs / n;
  out.rhs = rhs / n;
  out.residual = mean;
  out.std_error = std::sqrt(var / n);
  out.samples = opts.samples;
  return out;
}

// Same residual for a batch of functions sharing one set of Monte Carlo
// draws (sampling dominates the cost of catalog sweeps).  Quadrature mode
// simply loops.
inline std::vector<IbpResult> ibp_residual_batch(const WeightVector& w,
                                                 std::span<const SimplexFunction> fs,
                                                 const IbpOptions& opts) {
  std::vector<IbpResult> results(fs.size());
  if (opts.mode == IbpOptions::Mode::quadrature) {
    for (size_t i = 0; i < fs.size(); ++i) results[i] = ibp_residual(w, fs[i], opts);
    return results;
  }
  std::array<double, kMaxDirections> grad{};
  std::span<double> grad_span(grad.data(), w.directions());
  std::vector<double> sum(fs.size(), 0.0), sumsq(fs.size(), 0.0);
  std::vector<double> lhs(fs.size(), 0.0), rhs(fs.size(), 0.0);
  RandomStream rng(opts.seed);
  for (std::int64_t s = 0; s < opts.samples; ++s) {
    SimplexPoint x = sample_dirichlet(w, rng);
    for (size_t i = 0; i < fs.size(); ++i) {
      auto t = detail::ibp_terms(w, fs[i], opts.direction, x.probs(), grad_span);
      double r = t.lhs - t.rhs;
      sum[i] += r;
      sumsq[i] += r * r;
      lhs[i] += t.lhs;
      rhs[i] += t.rhs;
    }
  }
  double n = static_cast<double>(opts.samples);
  for (size_t i = 0; i < fs.size(); ++i) {
    double mean = sum[i] / n;
    double var = std::max(0.0, (sumsq[i] - n * mean * mean) / (n - 1.0));
    results[i].lhs = lhs[i] / n;
    results[i].rhs = rhs[i] / n;
    results[i].residual = mean;
    results[i].std_error = std::sqrt(var / n);
    results[i].samples = opts.samples;
  }
  return results;
}

}  // namespace rwre
