#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "rwre/kalikow.hpp"

using namespace rwre;

TEST_CASE("kernel bounds: frozen values and degenerate cases", "[kalikow]") {
  WeightVector w(1, {2.5, 1.0});  // gamma = 3.5
  auto bounds = prop2_bounds(w);
  CHECK(bounds[0].lo == Catch::Approx(1.5 / 2.5).epsilon(1e-15));
  CHECK(bounds[0].hi == 1.0);  // 2.5/2.5 clipped
  CHECK(bounds[1].lo == 0.0);  // (1-1)/2.5
  CHECK(bounds[1].hi == Catch::Approx(1.0 / 2.5).epsilon(1e-15));
  CHECK_FALSE(bounds[0].vacuous);

  WeightVector low(1, {0.3, 0.4});  // gamma < 1: inequalities flip away
  auto vac = prop2_bounds(low);
  CHECK(vac[0].vacuous);
  CHECK(vac[1].vacuous);

  WeightVector unit(1, {0.5, 0.5});  // gamma = 1 exactly
  CHECK_THROWS_AS(prop2_bounds(unit), DegenerateNormalizer);
}

TEST_CASE("drift box misses the origin exactly in the transient case", "[kalikow]") {
  WeightVector strong(1, {2.5, 1.0});
  DriftBox box = theorem1_drift_box(strong);
  CHECK(box.lo[0] == Catch::Approx(0.5 / 2.5).epsilon(1e-15));
  CHECK(box.hi[0] == 1.0);
  CHECK(box.excludes_zero);
  CHECK(theorem1_condition(strong));

  WeightVector balanced(2, {2.0, 2.0, 2.0, 2.0});
  DriftBox sym = theorem1_drift_box(balanced);
  CHECK_FALSE(sym.excludes_zero);
  CHECK(sym.lo[0] == Catch::Approx(-1.0 / 7.0).epsilon(1e-14));
  CHECK_FALSE(theorem1_condition(balanced));

  // agreement is two-sided: box excludes zero iff the walk is transient
  RandomStream rng(14);
  for (int rep = 0; rep < 30; ++rep) {
    int dim = 1 + rep % 2;
    std::vector<double> alphas(2 * dim);
    double total = 0.0;
    for (double& a : alphas) {
      a = 0.4 + 2.6 * rng.next_unit();
      total += a;
    }
    if (total <= 1.0) continue;
    WeightVector wr(dim, std::span<const double>(alphas.data(), alphas.size()));
    CHECK(theorem1_drift_box(wr).excludes_zero == theorem1_condition(wr));
  }
}

TEST_CASE("single-site domain gives the annealed mean kernel", "[kalikow]") {
  // with one interior site the Green weight is identically 1, so the
  // auxiliary kernel is exactly the mean environment m_i
  WeightVector w(1, {2.0, 1.5});
  FiniteDomain dom = FiniteDomain::segment(0, 0);
  KalikowEstimate est = estimate_kalikow(w, dom, origin(1), 0.9, 800, 3, 0);
  REQUIRE(est.rows.size() == 1);
  const KalikowSiteRow& row = est.rows[0];
  CHECK(row.mean_weight == 1.0);
  CHECK(std::abs(est.row_sum(0) - 1.0) <= 1e-14);
  for (int dir = 0; dir < 2; ++dir) {
    CHECK(row.kernel_se[dir] > 0.0);
    CHECK(std::abs(row.kernel[dir] - w.mean(dir)) <= 4.0 * row.kernel_se[dir]);
  }
}

TEST_CASE("kalikow rows always sum to one", "[kalikow]") {
  WeightVector w(2, {1.2, 0.8, 2.0, 1.1});
  FiniteDomain dom = FiniteDomain::box(origin(2), 1);
  KalikowEstimate est = estimate_kalikow(w, dom, origin(2), 0.8, 400, 9, 0);
  for (std::size_t z = 0; z < est.rows.size(); ++z)
    CHECK(std::abs(est.row_sum(static_cast<int>(z)) - 1.0) <= 1e-13);
}

TEST_CASE("kalikow estimates respect the a priori bounds", "[kalikow]") {
  WeightVector w(1, {2.5, 1.2});
  FiniteDomain dom = FiniteDomain::segment(-3, 3);
  KalikowEstimate est = estimate_kalikow(w, dom, origin(1), 0.9, 3000, 41, 0);
  auto bounds = prop2_bounds(w);
  DriftBox box = theorem1_drift_box(w);
  for (const KalikowSiteRow& row : est.rows) {
    for (int dir = 0; dir < 2; ++dir) {
      CHECK(row.kernel[dir] >= bounds[dir].lo - 3.0 * row.kernel_se[dir]);
      CHECK(row.kernel[dir] <= bounds[dir].hi + 3.0 * row.kernel_se[dir]);
    }
    CHECK(row.drift[0] >= box.lo[0] - 3.0 * row.drift_se[0]);
    CHECK(row.drift[0] <= box.hi[0] + 3.0 * row.drift_se[0]);
  }
}

TEST_CASE("kalikow estimation is worker-count invariant", "[kalikow]") {
  WeightVector w(1, {2.0, 1.0});
  FiniteDomain dom = FiniteDomain::segment(-2, 2);
  KalikowEstimate a = estimate_kalikow(w, dom, origin(1), 0.9, 500, 7, 1);
  KalikowEstimate b = estimate_kalikow(w, dom, origin(1), 0.9, 500, 7, 4);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t z = 0; z < a.rows.size(); ++z) {
    for (int dir = 0; dir < 2; ++dir) {
      CHECK(a.rows[z].kernel[dir] == b.rows[z].kernel[dir]);
      CHECK(a.rows[z].kernel_se[dir] == b.rows[z].kernel_se[dir]);
    }
  }
}

TEST_CASE("estimate_kalikow validates its inputs", "[kalikow]") {
  WeightVector w(1, {2.0, 1.0});
  FiniteDomain dom = FiniteDomain::segment(0, 3);
  CHECK_THROWS_AS(estimate_kalikow(w, dom, Site(1, {9}), 0.9, 100, 1, 0), Error);
  CHECK_THROWS_AS(estimate_kalikow(w, dom, origin(1), 1.5, 100, 1, 0), Error);
  CHECK_THROWS_AS(estimate_kalikow(w, dom, origin(1), 0.9, 1, 1, 0), Error);
  WeightVector w2(2, {1.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(estimate_kalikow(w2, dom, origin(1), 0.9, 100, 1, 0), WrongDimension);
}

TEST_CASE("expansion report: frozen one-dimensional values", "[kalikow]") {
  WeightVector w(1, {75.0, 25.0});
  ExpansionReport rep = expansion_velocity(w);
  CHECK(rep.gamma == 100.0);
  CHECK(rep.kernel.eta_m == Catch::Approx(12.928203230275503).epsilon(1e-12));
  CHECK(rep.precondition_ok);  // 2 * 12.93 / 100 < 1
  REQUIRE(rep.error_bound.has_value());
  CHECK(*rep.error_bound == Catch::Approx(0.36068052444612725).epsilon(1e-10));
  // in d = 1 the center is the exact ballistic speed
  CHECK(rep.center[0] == Catch::Approx(49.0 / 99.0).margin(1e-10));

  Consistency1d c = expansion_consistency_1d(w);
  CHECK(c.exact == Catch::Approx(49.0 / 99.0).epsilon(1e-15));
  CHECK(c.diff <= 1e-12);
}

TEST_CASE("expansion precondition is strict", "[kalikow]") {
  // same shape, smaller gamma: 2 * eta / gamma crosses 1 and the bound goes away
  WeightVector w(1, {18.75, 6.25});  // gamma = 25, eta ~ 12.93
  ExpansionReport rep = expansion_velocity(w);
  CHECK(rep.eta_over_gamma > 1.0);
  CHECK_FALSE(rep.precondition_ok);
  CHECK_FALSE(rep.error_bound.has_value());
}

TEST_CASE("expansion report: frozen two-dimensional center", "[kalikow]") {
  WeightVector w(2, {160.0, 80.0, 80.0, 80.0});
  ExpansionReport rep = expansion_velocity(w);
  CHECK(rep.green_origin == Catch::Approx(1.7761981056523337).margin(1e-9));
  CHECK(rep.center[0] == Catch::Approx(0.19961092826784343).margin(1e-9));
  CHECK(rep.center[1] == Catch::Approx(0.0).margin(1e-15));
  CHECK(rep.precondition_ok);
  REQUIRE(rep.error_bound.has_value());
}

TEST_CASE("expansion consistency guards its regime", "[kalikow]") {
  WeightVector d2(2, {4.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(expansion_consistency_1d(d2), WrongDimension);
  WeightVector slow(1, {1.4, 1.0});  // not ballistic: 1.4 < 2
  CHECK_THROWS_AS(expansion_consistency_1d(slow), WrongRegime);
  WeightVector tiny(1, {0.4, 0.3});
  CHECK_THROWS_AS(expansion_velocity(tiny), DegenerateNormalizer);
}
