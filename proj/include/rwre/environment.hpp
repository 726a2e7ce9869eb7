#pragma once

#include <cstdint>
#include <vector>

#include "rwre/dirichlet.hpp"
#include "rwre/lattice.hpp"
#include "rwre/rng.hpp"
#include "rwre/simplex.hpp"

namespace rwre {

// A virtual iid Dirichlet environment on all of Z^d: site kernels are never
// stored, they are recomputed on demand from a counter-based stream keyed by
// (seed, site).  The same (seed, weights, site) triple yields bit-identical
// kernels on every call, from any thread, in any process.
class EnvironmentView {
 public:
  EnvironmentView(std::uint64_t seed, WeightVector weights)
      : seed_(seed), weights_(std::move(weights)) {}

  std::uint64_t seed() const { return seed_; }
  const WeightVector& weights() const { return weights_; }
  int dim() const { return weights_.dim(); }

  SimplexPoint at(const Site& site) const {
    if (site.dim != weights_.dim())
      throw WrongDimension("site dimension does not match the environment");
    RandomStream rng(site_key(site));
    return sample_dirichlet(weights_, rng);
  }

 private:
  // 64-bit key mixing the seed and the coordinates; iterated mix64 keeps
  // distinct sites from colliding over any box we can afford to simulate.
  std::uint64_t site_key(const Site& site) const {
    std::uint64_t h = mix64(seed_ ^ 0x8f462907a7c3b1d5ull) +
                      static_cast<std::uint64_t>(site.dim);
    for (int i = 0; i < site.dim; ++i) {
      h = mix64(h + kGoldenGamma +
                static_cast<std::uint64_t>(static_cast<std::uint32_t>(site.c[i])));
    }
    return h;
  }

  std::uint64_t seed_;
  WeightVector weights_;
};

// Environment restricted to a finite domain, with kernels stored per
// interior site (indexed like domain.interior()).
class EnvTable {
 public:
  EnvTable(FiniteDomain domain, std::vector<SimplexPoint> interior_env)
      : domain_(std::move(domain)), env_(std::move(interior_env)) {
    if (env_.size() != domain_.interior().size())
      throw Error("environment table size does not match the domain");
  }

  const FiniteDomain& domain() const { return domain_; }
  const SimplexPoint& at_index(int interior_idx) const { return env_[interior_idx]; }
  const SimplexPoint& at(const Site& s) const {
    int idx = domain_.interior_index(s);
    if (idx < 0) throw Error("site " + s.to_string() + " is not interior");
    return env_[idx];
  }

 private:
  FiniteDomain domain_;
  std::vector<SimplexPoint> env_;
};

inline EnvTable materialize(const EnvironmentView& view, const FiniteDomain& domain) {
  std::vector<SimplexPoint> env;
  env.reserve(domain.interior().size());
  for (const Site& s : domain.interior()) env.push_back(view.at(s));
  return EnvTable(domain, std::move(env));
}

// Homogeneous table: every interior site carries the same kernel.  Used by
// the symmetrization checks and handy in tests.
inline EnvTable constant_environment(const FiniteDomain& domain, const SimplexPoint& kernel) {
  std::vector<SimplexPoint> env(domain.interior().size(), kernel);
  return EnvTable(domain, std::move(env));
}

}  // namespace rwre
