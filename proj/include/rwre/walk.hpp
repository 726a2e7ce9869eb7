#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/errors.hpp"
#include "rwre/lattice.hpp"
#include "rwre/parallel.hpp"
#include "rwre/rng.hpp"
#include "rwre/simplex.hpp"

namespace rwre {

// A nearest-neighbor path started at the origin.
struct Path {
  int dim = 0;
  std::vector<Site> sites;  // sites[0] is the origin

  std::int64_t steps() const {
    return sites.empty() ? 0 : static_cast<std::int64_t>(sites.size()) - 1;
  }
};

inline Path path_from_directions(int dim, std::span<const int> dirs) {
  Path p;
  p.dim = dim;
  p.sites.reserve(dirs.size() + 1);
  p.sites.push_back(origin(dim));
  for (int d : dirs) p.sites.push_back(neighbor(p.sites.back(), d));
  return p;
}

// Directed-edge crossing counts N_i(x): how often the path left site x in
// direction i.
struct CrossingCounts {
  int dim = 0;
  std::unordered_map<Site, std::array<std::uint32_t, kMaxDirections>, SiteHash> counts;

  std::int64_t total() const {
    std::int64_t t = 0;
    for (const auto& [site, arr] : counts)
      for (int i = 0; i < 2 * dim; ++i) t += arr[i];
    return t;
  }
};

inline CrossingCounts crossing_counts(const Path& path) {
  CrossingCounts cc;
  cc.dim = path.dim;
  for (size_t k = 0; k + 1 < path.sites.size(); ++k) {
    const Site& from = path.sites[k];
    const Site& to = path.sites[k + 1];
    int dir = -1;
    for (int cand = 0; cand < 2 * path.dim; ++cand) {
      if (neighbor(from, cand) == to) {
        dir = cand;
        break;
      }
    }
    if (dir < 0) throw Error("path sites are not nearest neighbors");
    auto [it, fresh] = cc.counts.try_emplace(from);
    if (fresh) it->second.fill(0);
    ++it->second[dir];
  }
  return cc;
}

// ------------------------- quenched walk -------------------------

// Walk in a fixed sampled environment: at each step the kernel of the
// current site (fetched from the seeded view) picks the next direction.
inline Path run_quenched(const EnvironmentView& env, std::int64_t steps, RandomStream& rng) {
  Path p;
  p.dim = env.dim();
  p.sites.reserve(steps + 1);
  p.sites.push_back(origin(p.dim));
  for (std::int64_t n = 0; n < steps; ++n) {
    SimplexPoint w = env.at(p.sites.back());
    double u = rng.next_unit();
    double acc = 0.0;
    int dir = 2 * p.dim - 1;  // fallback for u landing past rounding slack
    for (int i = 0; i < 2 * p.dim; ++i) {
      acc += w[i];
      if (u < acc) {
        dir = i;
        break;
      }
    }
    p.sites.push_back(neighbor(p.sites.back(), dir));
  }
  return p;
}

// ------------------------- annealed / reinforced walk -------------------------

// The annealed walk as a directed-edge linearly reinforced walk: from site x
// direction i is chosen with probability (alpha_i + N_i(x)) / (gamma + N(x)),
// where N_i(x) counts previous departures from x in direction i.
class ReinforcedWalker {
 public:
  explicit ReinforcedWalker(const WeightVector& w)
      : w_(w), pos_(origin(w.dim())) {}

  const Site& position() const { return pos_; }

  // Current one-step distribution out of the current site.
  std::array<double, kMaxDirections> transition_probs() const {
    std::array<double, kMaxDirections> p{};
    const std::array<std::uint32_t, kMaxDirections>* n = nullptr;
    auto it = counts_.find(pos_);
    if (it != counts_.end()) n = &it->second;
    double total = w_.gamma();
    if (n)
      for (int i = 0; i < w_.directions(); ++i) total += (*n)[i];
    for (int i = 0; i < w_.directions(); ++i) {
      double num = w_.alpha(i) + (n ? static_cast<double>((*n)[i]) : 0.0);
      p[i] = num / total;
    }
    return p;
  }

  int step(RandomStream& rng) {
    auto [it, fresh] = counts_.try_emplace(pos_);
    if (fresh) it->second.fill(0);
    auto& n = it->second;
    double total = w_.gamma();
    for (int i = 0; i < w_.directions(); ++i) total += n[i];
    double u = rng.next_unit() * total;
    double acc = 0.0;
    int dir = w_.directions() - 1;
    for (int i = 0; i < w_.directions(); ++i) {
      acc += w_.alpha(i) + n[i];
      if (u < acc) {
        dir = i;
        break;
      }
    }
    ++n[dir];
    pos_ = neighbor(pos_, dir);
    return dir;
  }

 private:
  WeightVector w_;
  Site pos_;
  std::unordered_map<Site, std::array<std::uint32_t, kMaxDirections>, SiteHash> counts_;
};

inline Path run_reinforced(const WeightVector& w, std::int64_t steps, RandomStream& rng) {
  ReinforcedWalker walker(w);
  Path p;
  p.dim = w.dim();
  p.sites.reserve(steps + 1);
  p.sites.push_back(walker.position());
  for (std::int64_t n = 0; n < steps; ++n) {
    walker.step(rng);
    p.sites.push_back(walker.position());
  }
  return p;
}

// log P(path) under the annealed law, in closed form: the Gamma-ratio moment
// of the crossing counts, one independent Dirichlet factor per visited site.
inline double annealed_path_logprob(const WeightVector& w, const Path& path) {
  if (path.dim != w.dim()) throw WrongDimension("path dimension mismatch");
  CrossingCounts cc = crossing_counts(path);
  double lp = 0.0;
  const double lg_gamma = std::lgamma(w.gamma());
  for (const auto& [site, n] : cc.counts) {
    std::uint64_t total = 0;
    for (int i = 0; i < w.directions(); ++i) total += n[i];
    if (total == 0) continue;
    lp += lg_gamma - std::lgamma(w.gamma() + static_cast<double>(total));
    for (int i = 0; i < w.directions(); ++i) {
      if (n[i] == 0) continue;
      lp += std::lgamma(w.alpha(i) + static_cast<double>(n[i])) - std::lgamma(w.alpha(i));
    }
  }
  return lp;
}

// All direction sequences of the given length; the exhaustive side of the
// path-law equivalence checks.  (2d)^steps paths, so keep steps small.
inline std::vector<Path> enumerate_paths(int dim, int steps) {
  std::vector<Path> out;
  std::vector<int> dirs(steps, 0);
  std::int64_t total = 1;
  for (int k = 0; k < steps; ++k) total *= 2 * dim;
  out.reserve(total);
  for (std::int64_t code = 0; code < total; ++code) {
    std::int64_t rest = code;
    for (int k = 0; k < steps; ++k) {
      dirs[k] = static_cast<int>(rest % (2 * dim));
      rest /= 2 * dim;
    }
    out.push_back(path_from_directions(dim, dirs));
  }
  return out;
}

// ------------------------- velocity -------------------------

struct VelocityEstimate {
  int dim = 0;
  std::int64_t steps = 0;
  std::int64_t runs = 0;
  std::array<double, kMaxDim> mean{};       // mean of X_n/n per axis
  std::array<double, kMaxDim> std_error{};  // standard error of that mean
  std::vector<std::array<std::int64_t, kMaxDim>> endpoints;  // per-run displacement
};

// Annealed velocity by independent reinforced runs.  Per-run streams are
// split off the master seed by run index and per-run endpoints are reduced
// in run order, so the estimate is identical for any worker count.
inline VelocityEstimate estimate_velocity(const WeightVector& w, std::int64_t steps,
                                          std::int64_t runs, std::uint64_t seed,
                                          int workers = 0) {
  if (steps <= 0 || runs <= 0) throw Error("estimate_velocity needs steps > 0 and runs > 0");
  VelocityEstimate est;
  est.dim = w.dim();
  est.steps = steps;
  est.runs = runs;
  est.endpoints.assign(runs, {});
  parallel_for(runs, workers, [&](std::int64_t r) {
    RandomStream rng(split_seed(seed, static_cast<std::uint64_t>(r)));
    ReinforcedWalker walker(w);
    for (std::int64_t n = 0; n < steps; ++n) walker.step(rng);
    for (int a = 0; a < w.dim(); ++a) est.endpoints[r][a] = walker.position().c[a];
  });
  const double n = static_cast<double>(runs);
  for (int a = 0; a < w.dim(); ++a) {
    double sum = 0.0;
    for (std::int64_t r = 0; r < runs; ++r)
      sum += static_cast<double>(est.endpoints[r][a]) / static_cast<double>(steps);
    double mean = sum / n;
    double ss = 0.0;
    for (std::int64_t r = 0; r < runs; ++r) {
      double v = static_cast<double>(est.endpoints[r][a]) / static_cast<double>(steps) - mean;
      ss += v * v;
    }
    est.mean[a] = mean;
    est.std_error[a] = runs > 1 ? std::sqrt(ss / (n * (n - 1.0))) : 0.0;
  }
  return est;
}

// ------------------------- ballisticity criteria -------------------------

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

// Directional transience test: some direction satisfies
// alpha_{e_i} > 1 + alpha_{-e_i} (strictly).
inline bool theorem1_condition(const WeightVector& w) {
  for (int dir = 0; dir < w.directions(); ++dir) {
    if (w.alpha(dir) > 1.0 + w.alpha(opposite_direction(dir, w.dim()))) return true;
  }
  return false;
}

// Per-axis velocity interval [(a_i - b_i -+ 1)] / (sum(alpha) - 1), where
// a_i, b_i are the weights of +e_i and -e_i.
inline std::vector<Interval> theorem1_bounds(const WeightVector& w) {
  double denom = w.gamma() - 1.0;
  if (denom <= 0.0)
    throw DegenerateNormalizer("velocity bounds need sum(alpha) > 1, got " +
                               std::to_string(w.gamma()));
  std::vector<Interval> out(w.dim());
  for (int a = 0; a < w.dim(); ++a) {
    double diff = w.alpha(a) - w.alpha(a + w.dim());
    out[a] = Interval{(diff - 1.0) / denom, (diff + 1.0) / denom};
  }
  return out;
}

// Exact annealed speed on Z: (a - b - 1)/(a + b - 1) when ballistic to the
// right, mirrored when ballistic to the left, 0 in the recurrent band.
inline double exact_velocity_1d(const WeightVector& w) {
  if (w.dim() != 1) throw WrongDimension("exact velocity formula is 1-d only");
  double a = w.alpha(0), b = w.alpha(1);
  if (a > 1.0 + b) return (a - b - 1.0) / (a + b - 1.0);
  if (b > 1.0 + a) return -(b - a - 1.0) / (a + b - 1.0);
  return 0.0;
}

}  // namespace rwre
