// End-to-end acceptance checks, one per invocation: `acceptance N` runs
// check N, prints a single pass/fail line and exits 0/1.  Tolerances are
// pinned here, next to the checks they gate.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "rwre/rwre.hpp"

#include "oracles.hpp"

using namespace rwre;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return std::string(buf);
}

Manifest manifest_from(const std::string& text) {
  std::istringstream in(text);
  Manifest m = Manifest::parse(in, "<acceptance>");
  validate_manifest(m);
  return m;
}

// Shared workloads: check 12 reruns checks 1, 8 and 11 at several worker
// counts, so their manifests live in one place.
const char* kVelocityManifest =
    "kind = velocity\ndim = 1\nalphas = 3,1\nsteps = 100000\nruns = 200\nseed = 7\n";
const char* kExpansionManifest =
    "kind = expansion\ndim = 2\nalphas = 160,80,80,80\nsteps = 100000\nruns = 400\nseed = 1\n";

std::vector<std::string> kalikow_manifest_texts() {
  // ten deterministic (alpha, domain, delta) draws with total weight > 1
  RandomStream rng(812);
  std::vector<std::string> out;
  for (int i = 0; i < 10; ++i) {
    int dim = 1 + i % 2;
    std::string alphas;
    for (int k = 0; k < 2 * dim; ++k) {
      double a = 0.6 + 2.4 * rng.next_unit();
      alphas += fmt("%s%.17g", k ? "," : "", a);
    }
    double delta = i % 2 ? 0.9 : 0.5;
    std::string domain = dim == 1 ? "segment = -3,3" : fmt("radius = %d", 1 + (i / 2) % 2);
    std::string z0 = dim == 1 ? "0" : "0,0";
    out.push_back(fmt("kind = kalikow\ndim = %d\nalphas = %s\ndelta = %.1f\n%s\nz0 = %s\n"
                      "samples = 10000\nseed = %d\n",
                      dim, alphas.c_str(), delta, domain.c_str(), z0.c_str(), 100 + i));
  }
  return out;
}

// ------------------------- the twelve checks -------------------------

Outcome check_velocity() {
  RunRecord rec = run_manifest(manifest_from(kVelocityManifest), 1);
  double mean = 0.0, se = 0.0;
  for (const Metric& m : rec.metrics)
    if (m.name == "velocity_1") {
      mean = m.value;
      se = *m.sigma;
    }
  bool pass = std::abs(mean - 1.0 / 3.0) <= 3.0 * se && rec.verdicts.at("theorem1") &&
              rec.verdicts.at("exact1d");
  return {pass, fmt("mean X_n/n = %.6f +- %.6f vs 1/3", mean, se)};
}

Outcome check_equivalence() {
  WeightVector w(2, {1.0, 2.0, 0.5, 1.5});
  // exhaustive 4-step mass
  double total = 0.0;
  for (const Path& p : enumerate_paths(2, 4)) total += std::exp(annealed_path_logprob(w, p));
  if (std::abs(total - 1.0) > 1e-10)
    return {false, fmt("4-step path mass = %.15f, off by more than 1e-10", total)};

  // sampled frequencies against the exact law
  RunRecord rec = run_manifest(manifest_from(
      "kind = equivalence\ndim = 2\nalphas = 1,2,0.5,1.5\npath_length = 4\n"
      "runs = 1000000\nseed = 2\n"), 1);
  double stat = 0.0, crit = 0.0;
  for (const Metric& m : rec.metrics) {
    if (m.name == "chi2_reinforced") stat = m.value;
    if (m.name == "chi2_critical") crit = m.value;
  }
  if (!rec.verdicts.at("prop1_chi2") || !rec.verdicts.at("prop1_total"))
    return {false, fmt("chi2 = %.1f vs critical %.1f", stat, crit)};

  // closed-form log-probabilities against the sequential product
  RandomStream rng(6);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<int> dirs(12);
    for (int& d : dirs) d = static_cast<int>(rng.next_unit() * 4);
    double lib = annealed_path_logprob(w, path_from_directions(2, dirs));
    double ref = std::log(oracles::sequential_path_prob(w, dirs));
    worst = std::max(worst, std::abs(lib - ref));
  }
  bool pass = worst <= 1e-12;
  return {pass, fmt("chi2 = %.1f (crit %.1f), worst log-prob gap = %.2e", stat, crit, worst)};
}

Outcome check_ibp() {
  RandomStream rng(91);
  double worst_quad = 0.0;
  auto catalog2 = polynomial_catalog(2);
  for (int i = 0; i < 10; ++i) {
    WeightVector w(1, {0.5 + 3.5 * rng.next_unit(), 0.5 + 3.5 * rng.next_unit()});
    IbpOptions opts;
    opts.mode = IbpOptions::Mode::quadrature;
    opts.direction = i % 2;
    opts.quad_nodes = 16;
    for (const SimplexFunction& f : catalog2) {
      IbpResult r = ibp_residual(w, f, opts);
      worst_quad = std::max(worst_quad, std::abs(r.residual));
    }
  }
  if (worst_quad > 1e-10)
    return {false, fmt("quadrature residual max = %.2e > 1e-10", worst_quad)};

  auto catalog4 = polynomial_catalog(4);
  double worst_sigmas = 0.0;
  for (int i = 0; i < 10; ++i) {
    WeightVector w(2, {0.5 + 3.5 * rng.next_unit(), 0.5 + 3.5 * rng.next_unit(),
                       0.5 + 3.5 * rng.next_unit(), 0.5 + 3.5 * rng.next_unit()});
    IbpOptions opts;
    opts.mode = IbpOptions::Mode::monte_carlo;
    opts.direction = i % 4;
    opts.samples = 1000000;
    opts.seed = 500 + i;
    auto results = ibp_residual_batch(
        w, std::span<const SimplexFunction>(catalog4.data(), catalog4.size()), opts);
    for (const IbpResult& r : results)
      worst_sigmas = std::max(worst_sigmas, std::abs(r.residual) / std::max(r.std_error, 1e-15));
  }
  bool pass = worst_sigmas <= 3.0;
  return {pass, fmt("quadrature max residual %.2e, MC max |residual|/SE = %.2f", worst_quad,
                    worst_sigmas)};
}

Outcome check_derivative() {
  RandomStream rng(55);
  double worst_rel = 0.0;
  int measured = 0;
  for (int i = 0; i < 50; ++i) {
    int dim = 1 + i % 2;
    double delta = (i / 2) % 2 ? 0.9 : 0.5;
    FiniteDomain dom =
        dim == 1 ? FiniteDomain::segment(-3, 3) : FiniteDomain::box(origin(2), 2);
    std::vector<double> alphas(2 * dim);
    for (double& a : alphas) a = 1.0 + 3.0 * rng.next_unit();
    WeightVector w(dim, std::span<const double>(alphas.data(), alphas.size()));
    const auto& in = dom.interior();
    for (int attempt = 0; attempt < 256; ++attempt) {
      EnvTable env = materialize(EnvironmentView(rng.next_u64(), w), dom);
      auto pick = [&] { return in[static_cast<std::size_t>(rng.next_unit() * in.size())]; };
      Site x1 = pick(), x2 = pick(), x4 = pick();
      Site x3 = neighbor(x2, static_cast<int>(rng.next_unit() * 2 * dim));
      if (dom.on_boundary(x3)) continue;  // boundary stencils checked below
      DerivativePair pair = green_derivative_check(env, delta, x1, x2, x3, x4);
      if (std::abs(pair.analytic) < 3e-5) continue;
      worst_rel = std::max(worst_rel,
                           std::abs(pair.numeric - pair.analytic) / std::abs(pair.analytic));
      ++measured;
      break;
    }
  }
  if (measured < 50) return {false, fmt("only %d/50 usable stencils", measured)};

  // boundary targets: both routes exactly zero
  FiniteDomain dom = FiniteDomain::box(origin(2), 2);
  WeightVector w(2, {2.0, 1.0, 1.5, 2.5});
  double worst_boundary = 0.0;
  for (int i = 0; i < 10; ++i) {
    EnvTable env = materialize(EnvironmentView(900 + i, w), dom);
    Site x2(2, {2, i % 5 - 2});           // right edge of the box
    Site x3 = neighbor(x2, 0);            // its outside neighbor
    DerivativePair pair = green_derivative_check(env, 0.9, origin(2), x2, x3, origin(2));
    worst_boundary =
        std::max(worst_boundary, std::max(std::abs(pair.analytic), std::abs(pair.numeric)));
  }
  bool pass = worst_rel <= 1e-6 && worst_boundary == 0.0;
  return {pass, fmt("max relative error %.2e over 50 stencils, boundary max %.1e", worst_rel,
                    worst_boundary)};
}

Outcome check_identities() {
  RandomStream rng(66);
  double worst = 0.0;
  const double deltas[] = {0.5, 0.9, 1.0};
  for (int i = 0; i < 30; ++i) {
    int dim = 1 + i % 2;
    double delta = deltas[i % 3];
    FiniteDomain dom =
        dim == 1 ? FiniteDomain::segment(-3, 3) : FiniteDomain::box(origin(2), 2);
    std::vector<double> alphas(2 * dim);
    for (double& a : alphas) a = 0.5 + 2.5 * rng.next_unit();
    WeightVector w(dim, std::span<const double>(alphas.data(), alphas.size()));
    EnvTable env = materialize(EnvironmentView(rng.next_u64(), w), dom);
    KilledGreenOperator op = green_killed(env, delta);
    for (const Site& z : dom.interior())
      worst = std::max(worst, std::abs(return_identity_residual(op, env, z)));
  }
  if (worst > 1e-10) return {false, fmt("return identity residual max = %.2e", worst)};

  double worst2 = 0.0;
  for (int i = 0; i < 20; ++i) {
    double a = 0.05 + 0.9 * rng.next_unit();
    double b = 0.05 + 0.9 * rng.next_unit();
    double delta = deltas[i % 3];
    FiniteDomain dom = FiniteDomain::segment(0, 1);
    std::vector<SimplexPoint> kernels = {SimplexPoint(2, {a, 1.0 - a}),
                                         SimplexPoint(2, {b, 1.0 - b})};
    KilledGreenOperator op = green_killed(EnvTable(dom, std::move(kernels)), delta);
    oracles::TwoSiteGreen ref(a, b, delta);
    Site s0(1, {0}), s1(1, {1});
    worst2 = std::max(worst2, std::abs(op.entry(s0, s0) - ref.g00));
    worst2 = std::max(worst2, std::abs(op.entry(s1, s1) - ref.g11));
    worst2 = std::max(worst2, std::abs(op.entry(s0, s1) - ref.g01));
    worst2 = std::max(worst2, std::abs(op.entry(s1, s0) - ref.g10));
  }
  bool pass = worst2 <= 1e-12;
  return {pass, fmt("return identity max %.2e, two-site closed form max %.2e", worst, worst2)};
}

Outcome check_fourier_series() {
  // frozen closed form first
  WeightVector base(1, {75.0, 25.0});
  double g = green_fourier_origin(homogeneous_stats(base));
  if (std::abs(g - 2.0) > 1e-10)
    return {false, fmt("closed-form case: got %.12f, want 2.0", g)};

  RandomStream rng(77);
  double worst_margin = -1e300;
  for (int i = 0; i < 20; ++i) {
    int dim = 1 + i % 3;
    HomogeneousKernel kernel;
    for (;;) {
      std::vector<double> alphas(2 * dim);
      for (double& a : alphas) a = 0.3 + 3.7 * rng.next_unit();
      WeightVector w(dim, std::span<const double>(alphas.data(), alphas.size()));
      kernel = homogeneous_stats(w);
      if (kernel.k_m <= 0.95) break;
    }
    double fv = green_fourier_origin(kernel);
    SeriesValue sv = green_series_origin(kernel);
    double gap = std::abs(fv - sv.value);
    worst_margin = std::max(worst_margin, gap - sv.tail_bound);
    if (gap > sv.tail_bound + 1e-8)
      return {false, fmt("kernel %d (d=%d, k=%.3f): gap %.2e > tail %.2e + 1e-8", i, dim,
                         kernel.k_m, gap, sv.tail_bound)};
    if (dim == 1) {
      double closed = 1.0 / std::abs(kernel.drift[0]);
      if (std::abs(fv - closed) > 1e-10)
        return {false, fmt("d=1 closed form off by %.2e", std::abs(fv - closed))};
    }
  }
  return {true, fmt("20 kernels, worst gap-minus-tail = %.2e", worst_margin)};
}

Outcome check_symmetrize() {
  RandomStream rng(88);
  double worst = 0.0;
  for (double delta : {0.8, 0.9}) {
    for (int rep = 0; rep < 4; ++rep) {
      std::vector<double> a1 = {0.5 + 3.0 * rng.next_unit(), 0.5 + 3.0 * rng.next_unit()};
      WeightVector w1(1, std::span<const double>(a1.data(), 2));
      worst = std::max(worst, symmetrize_check(homogeneous_stats(w1), delta,
                                               FiniteDomain::segment(-4, 4)));
      std::vector<double> a2(4);
      for (double& a : a2) a = 0.5 + 3.0 * rng.next_unit();
      WeightVector w2(2, std::span<const double>(a2.data(), 4));
      worst = std::max(worst, symmetrize_check(homogeneous_stats(w2), delta,
                                               FiniteDomain::box(origin(2), 2)));
    }
  }
  return {worst <= 1e-10, fmt("max entrywise deviation %.2e", worst)};
}

Outcome check_kalikow() {
  for (const std::string& text : kalikow_manifest_texts()) {
    RunRecord rec = run_manifest(manifest_from(text), 1);
    if (!rec.verdicts.at("prop2")) {
      double sig = 0.0, dev = 0.0;
      for (const Metric& m : rec.metrics) {
        if (m.name == "kernel_violation_sigmas") sig = m.value;
        if (m.name == "row_sum_dev_max") dev = m.value;
      }
      return {false, fmt("instance %s: violation %.2f sigma, row dev %.1e",
                         rec.manifest_digest.c_str(), sig, dev)};
    }
  }
  return {true, "10 instances inside the kernel bounds at 3 sigma"};
}

Outcome check_return_bound() {
  WeightVector w(1, {3.0, 1.0});
  FiniteDomain dom = FiniteDomain::segment(0, 4);
  GreenReturnEstimate est = mean_green_return(w, dom, origin(1), 20000, 31, 1);
  if (!est.bound || std::abs(*est.bound - 7.59375) > 1e-12)
    return {false, "escape-route bound is not 1.5^5"};
  bool pass = est.estimate <= *est.bound + 3.0 * est.std_error;
  return {pass, fmt("E[G(0,0)] = %.4f +- %.4f <= %.5f", est.estimate, est.std_error,
                    *est.bound)};
}

Outcome check_consistency_1d() {
  RandomStream rng(44);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    double ap = 1.6 + 4.0 * rng.next_unit();
    double am = 0.2 + (ap - 1.5) * 0.7 * rng.next_unit();
    bool mirror = i % 2 == 1;
    WeightVector w(1, {mirror ? am : ap, mirror ? ap : am});
    Consistency1d c = expansion_consistency_1d(w);
    worst = std::max(worst, c.diff);
  }
  return {worst <= 1e-12, fmt("max |center - exact| = %.2e over 20 ballistic weights", worst)};
}

Outcome check_expansion_2d() {
  RunRecord rec = run_manifest(manifest_from(kExpansionManifest), 1);
  double dev = 0.0, bound = 0.0, se = 0.0;
  for (const Metric& m : rec.metrics) {
    if (m.name == "deviation_l2") {
      dev = m.value;
      se = *m.sigma;
      if (m.bound_hi) bound = *m.bound_hi;
    }
  }
  bool pass = rec.verdicts.at("prop3");
  return {pass, fmt("|v - center| = %.5f <= %.5f (error bound + 3 SE of %.5f)", dev, bound, se)};
}

Outcome check_determinism() {
  const int worker_counts[] = {1, 2, 8};
  auto stable = [&](const Manifest& m, std::string* first_json) {
    for (int wc : worker_counts) {
      RunRecord rec = run_manifest(m, wc);
      std::string json = record_results_json(rec) + record_metrics_csv(rec);
      if (first_json->empty())
        *first_json = json;
      else if (*first_json != json)
        return false;
    }
    return true;
  };
  std::string j1;
  if (!stable(manifest_from(kVelocityManifest), &j1))
    return {false, "velocity results differ across worker counts"};
  for (const std::string& text : kalikow_manifest_texts()) {
    std::string jk;
    if (!stable(manifest_from(text), &jk))
      return {false, "kalikow results differ across worker counts"};
  }
  std::string j11;
  if (!stable(manifest_from(kExpansionManifest), &j11))
    return {false, "expansion results differ across worker counts"};
  return {true, "velocity, kalikow and expansion records byte-identical at 1/2/8 workers"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance N   (N in 1..12)\n");
    return 2;
  }
  int n = std::atoi(argv[1]);
  struct Entry {
    const char* name;
    Outcome (*run)();
  };
  const Entry entries[12] = {
      {"exact 1-d velocity", check_velocity},
      {"path-law equivalence", check_equivalence},
      {"integration by parts", check_ibp},
      {"green derivative", check_derivative},
      {"green identities", check_identities},
      {"fourier vs series", check_fourier_series},
      {"symmetrization", check_symmetrize},
      {"kalikow bounds", check_kalikow},
      {"return bound", check_return_bound},
      {"expansion consistency 1d", check_consistency_1d},
      {"expansion bound 2d", check_expansion_2d},
      {"determinism", check_determinism},
  };
  if (n < 1 || n > 12) {
    std::fprintf(stderr, "usage: acceptance N   (N in 1..12)\n");
    return 2;
  }
  Outcome out;
  try {
    out = entries[n - 1].run();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  std::printf("criterion %d (%s): %s - %s\n", n, entries[n - 1].name,
              out.pass ? "PASS" : "FAIL", out.detail.c_str());
  return out.pass ? 0 : 1;
}
