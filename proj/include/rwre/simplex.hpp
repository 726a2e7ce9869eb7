#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "rwre/errors.hpp"

namespace rwre {

// Lattice dimensions supported by the toolkit.  Everything is sized for
// desk-scale experiments (the manifests cap d at 3); 4 leaves headroom
// while keeping Site/SimplexPoint cheap value types.
inline constexpr int kMaxDim = 4;
inline constexpr int kMaxDirections = 2 * kMaxDim;

// Direction encoding: 0..d-1 are +e_1..+e_d, d..2d-1 are -e_1..-e_d.
inline int opposite_direction(int dir, int dim) {
  return dir < dim ? dir + dim : dir - dim;
}

inline int direction_axis(int dir, int dim) { return dir < dim ? dir : dir - dim; }

inline int direction_sign(int dir, int dim) { return dir < dim ? +1 : -1; }

// Positive Dirichlet weights attached to the 2d unit steps of Z^d.
class WeightVector {
 public:
  WeightVector(int dim, std::span<const double> alphas) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim)
      throw WrongDimension("weight vector dimension must be in [1, " +
                           std::to_string(kMaxDim) + "], got " + std::to_string(dim));
    if (static_cast<int>(alphas.size()) != 2 * dim)
      throw Error("weight vector needs 2*dim = " + std::to_string(2 * dim) +
                  " entries, got " + std::to_string(alphas.size()));
    gamma_ = 0.0;
    for (int i = 0; i < 2 * dim_; ++i) {
      double a = alphas[i];
      if (!(a > 0.0) || !std::isfinite(a))
        throw Error("weight entries must be positive and finite");
      alpha_[i] = a;
      gamma_ += a;
    }
  }

  WeightVector(int dim, std::initializer_list<double> alphas)
      : WeightVector(dim, std::span<const double>(alphas.begin(), alphas.size())) {}

  int dim() const { return dim_; }
  int directions() const { return 2 * dim_; }
  double alpha(int dir) const { return alpha_[dir]; }
  double gamma() const { return gamma_; }
  // Annealed one-step mean m_i = alpha_i / gamma.
  double mean(int dir) const { return alpha_[dir] / gamma_; }
  std::span<const double> alphas() const { return {alpha_.data(), static_cast<size_t>(2 * dim_)}; }

 private:
  int dim_;
  std::array<double, kMaxDirections> alpha_{};
  double gamma_;
};

// A point of the open probability simplex over the 2d directions: one
// sampled transition kernel omega(x, .).
class SimplexPoint {
 public:
  SimplexPoint() : n_(0) {}

  SimplexPoint(int entries, std::span<const double> probs) : n_(entries) {
    if (entries < 2 || entries > kMaxDirections || entries % 2 != 0)
      throw Error("simplex point needs an even entry count in [2, " +
                  std::to_string(kMaxDirections) + "]");
    if (static_cast<int>(probs.size()) != entries)
      throw Error("simplex point entry count mismatch");
    double sum = 0.0;
    for (int i = 0; i < n_; ++i) {
      double v = probs[i];
      if (!(v > 0.0) || v > 1.0)
        throw Error("simplex entries must lie in (0, 1]");
      p_[i] = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw Error("simplex entries must sum to 1 within 1e-12");
  }

  SimplexPoint(int entries, std::initializer_list<double> probs)
      : SimplexPoint(entries, std::span<const double>(probs.begin(), probs.size())) {}

  int size() const { return n_; }
  double operator[](int i) const { return p_[i]; }
  std::span<const double> probs() const { return {p_.data(), static_cast<size_t>(n_)}; }

 private:
  int n_;
  std::array<double, kMaxDirections> p_{};
};

// Exponent tuple for moments E[prod_i x_i^{n_i}].
class MultiIndex {
 public:
  MultiIndex(int entries, std::span<const int> exponents) : n_(entries) {
    if (entries < 1 || entries > kMaxDirections)
      throw Error("multi-index entry count out of range");
    if (static_cast<int>(exponents.size()) != entries)
      throw Error("multi-index entry count mismatch");
    for (int i = 0; i < n_; ++i) {
      if (exponents[i] < 0) throw Error("multi-index exponents must be nonnegative");
      e_[i] = exponents[i];
    }
  }

  MultiIndex(int entries, std::initializer_list<int> exponents)
      : MultiIndex(entries, std::span<const int>(exponents.begin(), exponents.size())) {}

  int size() const { return n_; }
  int operator[](int i) const { return e_[i]; }
  int total() const {
    int t = 0;
    for (int i = 0; i < n_; ++i) t += e_[i];
    return t;
  }

 private:
  int n_;
  std::array<int, kMaxDirections> e_{};
};

}  // namespace rwre
