#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rwre/errors.hpp"
#include "rwre/rng.hpp"
#include "rwre/simplex.hpp"

namespace rwre {

// A lattice site of Z^d.  Fixed-capacity coordinates keep Site a flat value
// type usable as a hash key in walk inner loops.
struct Site {
  int dim = 0;
  std::array<std::int32_t, kMaxDim> c{};

  Site() = default;
  Site(int d, std::initializer_list<std::int32_t> coords) : dim(d) {
    if (d < 1 || d > kMaxDim) throw WrongDimension("site dimension out of range");
    if (static_cast<int>(coords.size()) != d) throw Error("site coordinate count mismatch");
    std::copy(coords.begin(), coords.end(), c.begin());
  }
  Site(int d, std::span<const std::int32_t> coords) : dim(d) {
    if (d < 1 || d > kMaxDim) throw WrongDimension("site dimension out of range");
    if (static_cast<int>(coords.size()) != d) throw Error("site coordinate count mismatch");
    std::copy(coords.begin(), coords.end(), c.begin());
  }

  bool operator==(const Site& o) const { return dim == o.dim && c == o.c; }
  bool operator!=(const Site& o) const { return !(*this == o); }

  // lexicographic; used only to fix deterministic orderings
  bool operator<(const Site& o) const {
    for (int i = 0; i < dim; ++i)
      if (c[i] != o.c[i]) return c[i] < o.c[i];
    return false;
  }

  std::string to_string() const {
    std::string s = "(";
    for (int i = 0; i < dim; ++i) {
      if (i) s += ",";
      s += std::to_string(c[i]);
    }
    return s + ")";
  }
};

inline Site origin(int dim) {
  Site s;
  s.dim = dim;
  return s;
}

// Neighbor in the encoded direction (0..d-1 positive axes, d..2d-1 negative).
inline Site neighbor(const Site& s, int dir) {
  Site out = s;
  out.c[direction_axis(dir, s.dim)] += direction_sign(dir, s.dim);
  return out;
}

struct SiteHash {
  std::size_t operator()(const Site& s) const {
    std::uint64_t h = 0x6a09e667f3bcc908ull ^ static_cast<std::uint64_t>(s.dim);
    for (int i = 0; i < s.dim; ++i)
      h = mix64(h + kGoldenGamma + static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.c[i])));
    return static_cast<std::size_t>(h);
  }
};

// A finite connected set of interior sites together with its exact outer
// boundary (sites outside at lattice distance 1).  Interior and boundary
// orderings are deterministic: interior in construction order, boundary
// sorted lexicographically.
class FiniteDomain {
 public:
  // Empty domain; useful only as a value to assign into.
  FiniteDomain() = default;

  // Closed sup-norm box of the given radius around center.
  static FiniteDomain box(const Site& center, int radius) {
    if (radius < 0) throw Error("box radius must be nonnegative");
    std::vector<Site> sites;
    const int d = center.dim;
    Site cur = center;
    // odometer over [-radius, radius]^d, lexicographic
    std::array<int, kMaxDim> off{};
    off.fill(-radius);
    for (;;) {
      for (int i = 0; i < d; ++i) cur.c[i] = center.c[i] + off[i];
      sites.push_back(cur);
      int axis = d - 1;
      while (axis >= 0 && off[axis] == radius) off[axis--] = -radius;
      if (axis < 0) break;
      ++off[axis];
    }
    return FiniteDomain(std::move(sites), /*trusted_connected=*/true);
  }

  // d=1 convenience: interior {lo, ..., hi}.
  static FiniteDomain segment(std::int32_t lo, std::int32_t hi) {
    if (lo > hi) throw Error("segment needs lo <= hi");
    std::vector<Site> sites;
    for (std::int32_t x = lo; x <= hi; ++x) sites.push_back(Site(1, {x}));
    return FiniteDomain(std::move(sites), /*trusted_connected=*/true);
  }

  // General constructor from an explicit interior list.  Verifies the sites
  // are distinct, share a dimension and form a connected set under
  // nearest-neighbor adjacency.
  static FiniteDomain from_sites(std::vector<Site> interior) {
    return FiniteDomain(std::move(interior), /*trusted_connected=*/false);
  }

  int dim() const { return dim_; }
  const std::vector<Site>& interior() const { return interior_; }
  const std::vector<Site>& boundary() const { return boundary_; }

  bool contains(const Site& s) const { return interior_index_.count(s) > 0; }
  bool on_boundary(const Site& s) const { return boundary_index_.count(s) > 0; }

  // Index into interior()/boundary() ordering, or -1.
  int interior_index(const Site& s) const {
    auto it = interior_index_.find(s);
    return it == interior_index_.end() ? -1 : it->second;
  }
  int boundary_index(const Site& s) const {
    auto it = boundary_index_.find(s);
    return it == boundary_index_.end() ? -1 : it->second;
  }

 private:
  FiniteDomain(std::vector<Site> interior, bool trusted_connected)
      : interior_(std::move(interior)) {
    if (interior_.empty()) {
      dim_ = 0;
      return;
    }
    dim_ = interior_[0].dim;
    interior_index_.reserve(interior_.size() * 2);
    for (size_t i = 0; i < interior_.size(); ++i) {
      if (interior_[i].dim != dim_) throw Error("interior sites must share one dimension");
      auto [it, fresh] = interior_index_.emplace(interior_[i], static_cast<int>(i));
      if (!fresh) throw Error("duplicate interior site " + interior_[i].to_string());
    }
    if (!trusted_connected) check_connected();
    collect_boundary();
  }

  void check_connected() {
    std::unordered_set<Site, SiteHash> seen;
    std::deque<Site> queue;
    queue.push_back(interior_[0]);
    seen.insert(interior_[0]);
    while (!queue.empty()) {
      Site s = queue.front();
      queue.pop_front();
      for (int dir = 0; dir < 2 * dim_; ++dir) {
        Site n = neighbor(s, dir);
        if (contains(n) && seen.insert(n).second) queue.push_back(n);
      }
    }
    if (seen.size() != interior_.size())
      throw Error("interior sites must form a connected set");
  }

  void collect_boundary() {
    std::unordered_set<Site, SiteHash> bset;
    for (const Site& s : interior_) {
      for (int dir = 0; dir < 2 * dim_; ++dir) {
        Site n = neighbor(s, dir);
        if (!contains(n)) bset.insert(n);
      }
    }
    boundary_.assign(bset.begin(), bset.end());
    std::sort(boundary_.begin(), boundary_.end());
    boundary_index_.reserve(boundary_.size() * 2);
    for (size_t i = 0; i < boundary_.size(); ++i)
      boundary_index_.emplace(boundary_[i], static_cast<int>(i));
  }

  int dim_ = 0;
  std::vector<Site> interior_;
  std::vector<Site> boundary_;
  std::unordered_map<Site, int, SiteHash> interior_index_;
  std::unordered_map<Site, int, SiteHash> boundary_index_;
};

inline FiniteDomain make_box(const Site& center, int radius) {
  return FiniteDomain::box(center, radius);
}

}  // namespace rwre
