#pragma once

// Reference implementations used only by the tests.  Each one recomputes a
// quantity the library produces, by a deliberately different route, so that
// agreement is evidence rather than tautology.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "rwre/lattice.hpp"
#include "rwre/simplex.hpp"

namespace oracles {

// Tanh-sinh quadrature of f over (0, 1).  The substitution
// x = 1 / (1 + exp(-pi sinh t)) pushes both endpoints to infinity, where the
// weight decays doubly exponentially, so integrable endpoint singularities
// (the beta density with non-integer exponents) still converge at machine
// precision.  The functor receives x and 1-x separately; each is computed
// from its own expression, so neither tail loses digits to cancellation.
template <typename F>
inline double tanh_sinh_01(F&& f) {
  const double tmax = 4.3;  // weight below 1e-45 past this point
  double prev = 0.0;
  for (int level = 2; level <= 8; ++level) {
    const std::int64_t n = std::int64_t{1} << level;
    const double h = tmax / static_cast<double>(n);
    double sum = 0.0;
    for (std::int64_t k = -n; k <= n; ++k) {
      double z = M_PI_2 * std::sinh(k * h);
      double x = 1.0 / (1.0 + std::exp(-2.0 * z));
      double omx = 1.0 / (1.0 + std::exp(2.0 * z));
      double w = M_PI * std::cosh(k * h) * x * omx;  // dx/dt
      sum += w * f(x, omx);
    }
    double val = sum * h;
    if (level > 2 && std::abs(val - prev) <= 1e-14 * std::abs(val)) return val;
    prev = val;
  }
  return prev;
}

// E[x^p (1-x)^q] under Beta(a, b), by quadrature: the density is integrated
// numerically, including its own normalization, so no Gamma function
// identities are shared with the library.
inline double beta_moment(double a, double b, int p, int q) {
  auto dens = [&](double x, double omx) {
    return std::pow(x, a - 1.0) * std::pow(omx, b - 1.0);
  };
  double den = tanh_sinh_01(dens);
  double num = tanh_sinh_01([&](double x, double omx) {
    return dens(x, omx) * std::pow(x, p) * std::pow(omx, q);
  });
  return num / den;
}

// Probability of a direction string under the sequentially reinforced law:
// the walk leaves its current site through direction dir with probability
// (alpha_dir + N_dir) / (gamma + N), counts over past departures from that
// site.  Runs on std::map bookkeeping, unrelated to the library's walker.
inline double sequential_path_prob(const rwre::WeightVector& w, const std::vector<int>& dirs) {
  std::map<std::vector<int>, std::vector<std::int64_t>> counts;
  std::vector<int> pos(w.dim(), 0);
  double prob = 1.0;
  for (int dir : dirs) {
    auto& n = counts.emplace(pos, std::vector<std::int64_t>(w.directions(), 0)).first->second;
    std::int64_t total = 0;
    for (std::int64_t c : n) total += c;
    prob *= (w.alpha(dir) + static_cast<double>(n[dir])) / (w.gamma() + static_cast<double>(total));
    n[dir] += 1;
    int axis = dir % w.dim();
    pos[axis] += dir < w.dim() ? 1 : -1;
  }
  return prob;
}

// Killed Green function of the two-site chain {0, 1} with right-probability
// a at site 0 and right-probability b at site 1, killed on {-1, 2}:
// hand inversion of the 2x2 system.
struct TwoSiteGreen {
  double g00, g01, g10, g11;
  double g0_left, g1_right;  // boundary columns G(0, -1), G(1, 2)

  TwoSiteGreen(double a, double b, double delta) {
    double det = 1.0 - delta * delta * a * (1.0 - b);
    g00 = 1.0 / det;
    g11 = 1.0 / det;
    g01 = delta * a / det;
    g10 = delta * (1.0 - b) / det;
    g0_left = delta * ((1.0 - a) * g00);          // exit left from site 0
    g1_right = delta * (b * g11);                 // exit right from site 1
  }
};

}  // namespace oracles
