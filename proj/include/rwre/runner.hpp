#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include "rwre/dirichlet.hpp"
#include "rwre/environment.hpp"
#include "rwre/errors.hpp"
#include "rwre/green.hpp"
#include "rwre/kalikow.hpp"
#include "rwre/lattice.hpp"
#include "rwre/manifest.hpp"
#include "rwre/parallel.hpp"
#include "rwre/rng.hpp"
#include "rwre/version.hpp"
#include "rwre/walk.hpp"

namespace rwre {

// ------------------------- run records -------------------------
//
// Every experiment produces the same shape of output: a list of named
// metrics (value, optional one-sigma error, optional bounds it should
// respect) plus named boolean verdicts.  The `results` half of the record is
// a pure function of the manifest and the library version; wall-clock time
// and worker count live in `meta` so that reruns and parallel runs compare
// byte-for-byte.

struct Metric {
  std::string name;
  double value = 0.0;
  std::optional<double> sigma;
  std::optional<double> bound_lo;
  std::optional<double> bound_hi;
};

struct RunRecord {
  std::string kind;
  std::string manifest_digest;
  std::string version = kVersion;
  std::vector<Metric> metrics;
  std::map<std::string, bool> verdicts;
  // meta (excluded from the deterministic results block)
  double wall_seconds = 0.0;
  int workers = 1;
  std::string created;
  std::string manifest_source;
  // optional per-run table, written as runs.csv when present
  std::vector<std::string> runs_header;
  std::vector<std::vector<double>> runs_table;

  bool all_pass() const {
    for (const auto& [name, ok] : verdicts)
      if (!ok) return false;
    return true;
  }

  Metric& add(std::string name, double value) {
    metrics.push_back({std::move(name), value, std::nullopt, std::nullopt, std::nullopt});
    return metrics.back();
  }
};

// FNV-1a over the canonical manifest text and the library version; hex.
inline std::string manifest_digest(const Manifest& m) {
  std::string text = m.canonical() + "\nversion=" + kVersion;
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline nlohmann::json results_json(const RunRecord& r) {
  nlohmann::json metrics = nlohmann::json::array();
  for (const Metric& m : r.metrics) {
    nlohmann::json jm;
    jm["name"] = m.name;
    jm["value"] = m.value;
    if (m.sigma) jm["sigma"] = *m.sigma;
    if (m.bound_lo) jm["bound_lo"] = *m.bound_lo;
    if (m.bound_hi) jm["bound_hi"] = *m.bound_hi;
    metrics.push_back(std::move(jm));
  }
  nlohmann::json verdicts = nlohmann::json::object();
  for (const auto& [name, ok] : r.verdicts) verdicts[name] = ok;
  nlohmann::json out;
  out["kind"] = r.kind;
  out["manifest_digest"] = r.manifest_digest;
  out["version"] = r.version;
  out["metrics"] = std::move(metrics);
  out["verdicts"] = std::move(verdicts);
  return out;
}

}  // namespace detail

inline std::string record_results_json(const RunRecord& r) {
  return detail::results_json(r).dump(2);
}

inline std::string record_full_json(const RunRecord& r) {
  nlohmann::json out;
  out["results"] = detail::results_json(r);
  nlohmann::json meta;
  meta["created"] = r.created;
  meta["wall_seconds"] = r.wall_seconds;
  meta["workers"] = r.workers;
  meta["manifest_source"] = r.manifest_source;
  out["meta"] = std::move(meta);
  return out.dump(2);
}

// Tidy CSV, one metric per row; absent fields stay empty.
inline std::string record_metrics_csv(const RunRecord& r) {
  std::string out = "name,value,sigma,bound_low,bound_high\n";
  for (const Metric& m : r.metrics) {
    out += m.name + ',' + detail::fmt_double(m.value) + ',';
    if (m.sigma) out += detail::fmt_double(*m.sigma);
    out += ',';
    if (m.bound_lo) out += detail::fmt_double(*m.bound_lo);
    out += ',';
    if (m.bound_hi) out += detail::fmt_double(*m.bound_hi);
    out += '\n';
  }
  return out;
}

inline std::string record_runs_csv(const RunRecord& r) {
  std::string out;
  for (std::size_t i = 0; i < r.runs_header.size(); ++i)
    out += (i ? "," : "") + r.runs_header[i];
  out += '\n';
  for (const auto& row : r.runs_table) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += detail::fmt_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

// Writes record.json / metrics.csv (and runs.csv when present) into a fresh
// directory <out>/<kind>-<digest>; existing directories are never touched,
// a rerun gets a -2, -3, ... suffix instead.
inline std::filesystem::path write_record(const RunRecord& r, const Manifest& manifest,
                                          const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::string base = r.kind + "-" + r.manifest_digest;
  std::filesystem::path dir = out_dir / base;
  for (int k = 2; std::filesystem::exists(dir); ++k)
    dir = out_dir / (base + "-" + std::to_string(k));
  std::filesystem::create_directory(dir);
  std::ofstream(dir / "record.json") << record_full_json(r) << '\n';
  std::ofstream(dir / "metrics.csv") << record_metrics_csv(r);
  std::ofstream(dir / "manifest.txt") << manifest.canonical();
  if (!r.runs_table.empty()) std::ofstream(dir / "runs.csv") << record_runs_csv(r);
  return dir;
}

// ------------------------- experiment: velocity -------------------------

inline RunRecord run_velocity(const Manifest& m, int workers) {
  const int dim = static_cast<int>(m.get_int("dim", 0));
  auto alphas = m.get_doubles("alphas");
  WeightVector w(dim, std::span<const double>(alphas.data(), alphas.size()));
  const std::int64_t steps = m.get_int("steps", 0);
  const std::int64_t runs = m.get_int("runs", 0);
  const std::uint64_t seed = m.get_seed("seed", 1);

  VelocityEstimate est = estimate_velocity(w, steps, runs, seed, workers);
  RunRecord rec;
  rec.kind = "velocity";
  rec.add("gamma", w.gamma());
  rec.add("steps", static_cast<double>(steps));
  rec.add("runs", static_cast<double>(runs));
  rec.add("transient", theorem1_condition(w) ? 1.0 : 0.0);

  bool have_bounds = w.gamma() > 1.0;
  std::vector<Interval> bounds;
  if (have_bounds) bounds = theorem1_bounds(w);
  bool theorem1_ok = true;
  for (int a = 0; a < dim; ++a) {
    Metric& v = rec.add("velocity_" + std::to_string(a + 1), est.mean[a]);
    v.sigma = est.std_error[a];
    if (have_bounds) {
      v.bound_lo = bounds[a].lo;
      v.bound_hi = bounds[a].hi;
      double slack = 3.0 * est.std_error[a];
      if (est.mean[a] < bounds[a].lo - slack || est.mean[a] > bounds[a].hi + slack)
        theorem1_ok = false;
    }
  }
  if (have_bounds) rec.verdicts["theorem1"] = theorem1_ok;
  if (dim == 1 && have_bounds && theorem1_condition(w)) {
    double exact = exact_velocity_1d(w);
    Metric& e = rec.add("exact_velocity", exact);
    e.bound_lo = exact;
    e.bound_hi = exact;
    rec.verdicts["exact1d"] = std::abs(est.mean[0] - exact) <= 3.0 * est.std_error[0];
  }
  if (m.get_bool("dump_runs", false)) {
    rec.runs_header.push_back("run");
    for (int a = 0; a < dim; ++a) rec.runs_header.push_back("end_" + std::to_string(a + 1));
    rec.runs_table.reserve(est.endpoints.size());
    for (std::size_t r = 0; r < est.endpoints.size(); ++r) {
      std::vector<double> row{static_cast<double>(r)};
      for (int a = 0; a < dim; ++a) row.push_back(static_cast<double>(est.endpoints[r][a]));
      rec.runs_table.push_back(std::move(row));
    }
  }
  return rec;
}

// ------------------------- experiment: equivalence -------------------------

// Compares the linearly reinforced walk against the annealed law of the
// random environment along every path of a fixed length, and also against
// fresh quenched simulations, with chi-squared goodness of fit at 99% on
// both routes.
inline RunRecord run_equivalence(const Manifest& m, int workers) {
  const int dim = static_cast<int>(m.get_int("dim", 0));
  auto alphas = m.get_doubles("alphas");
  WeightVector w(dim, std::span<const double>(alphas.data(), alphas.size()));
  const int length = static_cast<int>(m.get_int("path_length", 0));
  const std::int64_t runs = m.get_int("runs", 0);
  const std::int64_t oracle_runs = m.get_int("oracle_runs", runs);
  const std::uint64_t seed = m.get_seed("seed", 1);
  const int fan = 2 * dim;
  std::int64_t cells = 1;
  for (int k = 0; k < length; ++k) {
    cells *= fan;
    if (cells > 1'000'000) throw Error("path ensemble too large to enumerate");
  }

  std::vector<double> prob(cells);
  double total = 0.0;
  {
    std::vector<Path> paths = enumerate_paths(dim, length);
    for (std::int64_t c = 0; c < cells; ++c) {
      prob[c] = std::exp(annealed_path_logprob(w, paths[c]));
      total += prob[c];
    }
  }

  // route 1: reinforced walks, one path code per run
  std::vector<std::int32_t> codes(runs);
  parallel_for(runs, workers, [&](std::int64_t r) {
    RandomStream rng(split_seed(seed, static_cast<std::uint64_t>(r)));
    ReinforcedWalker walker(w);
    // first step in the lowest digit, matching the enumerate_paths order
    std::int32_t code = 0, place = 1;
    for (int k = 0; k < length; ++k, place *= fan) code += walker.step(rng) * place;
    codes[r] = code;
  });
  std::vector<std::int64_t> observed(cells, 0);
  for (std::int64_t r = 0; r < runs; ++r) ++observed[codes[r]];

  // route 2: quenched walks in fresh environments, same annealed target
  const std::uint64_t oracle_master = seed ^ 0x6f7261636c65ull;
  std::vector<std::int32_t> oracle_codes(oracle_runs);
  parallel_for(oracle_runs, workers, [&](std::int64_t r) {
    std::uint64_t base = split_seed(oracle_master, static_cast<std::uint64_t>(r));
    EnvironmentView env(split_seed(base, 0), w);
    RandomStream rng(split_seed(base, 1));
    Path p = run_quenched(env, length, rng);
    std::int32_t code = 0, place = 1;
    for (std::size_t k = 0; k + 1 < p.sites.size(); ++k, place *= fan) {
      for (int dir = 0; dir < fan; ++dir)
        if (neighbor(p.sites[k], dir) == p.sites[k + 1]) {
          code += dir * place;
          break;
        }
    }
    oracle_codes[r] = code;
  });
  std::vector<std::int64_t> oracle_observed(cells, 0);
  for (std::int64_t r = 0; r < oracle_runs; ++r) ++oracle_observed[oracle_codes[r]];

  auto chi2 = [&](const std::vector<std::int64_t>& obs, std::int64_t n) {
    double stat = 0.0;
    for (std::int64_t c = 0; c < cells; ++c) {
      double expected = prob[c] * static_cast<double>(n);
      double d = static_cast<double>(obs[c]) - expected;
      stat += d * d / expected;
    }
    return stat;
  };
  boost::math::chi_squared_distribution<double> dist(static_cast<double>(cells - 1));
  const double crit = boost::math::quantile(dist, 0.99);

  RunRecord rec;
  rec.kind = "equivalence";
  rec.add("cells", static_cast<double>(cells));
  rec.add("dof", static_cast<double>(cells - 1));
  Metric& t = rec.add("total_prob", total);
  t.bound_lo = 1.0 - 1e-12;
  t.bound_hi = 1.0 + 1e-12;
  double stat_r = chi2(observed, runs);
  double stat_q = chi2(oracle_observed, oracle_runs);
  Metric& mr = rec.add("chi2_reinforced", stat_r);
  mr.bound_hi = crit;
  Metric& mq = rec.add("chi2_quenched", stat_q);
  mq.bound_hi = crit;
  rec.add("chi2_critical", crit);
  rec.verdicts["prop1_total"] = std::abs(total - 1.0) <= 1e-12;
  rec.verdicts["prop1_chi2"] = stat_r <= crit;
  rec.verdicts["prop1_oracle"] = stat_q <= crit;
  return rec;
}

// ------------------------- experiment: green -------------------------

inline RunRecord run_green(const Manifest& m, int workers) {
  const int dim = static_cast<int>(m.get_int("dim", 0));
  auto alphas = m.get_doubles("alphas");
  WeightVector w(dim, std::span<const double>(alphas.data(), alphas.size()));
  const std::string mode = m.get_string("mode");
  const std::uint64_t seed = m.get_seed("seed", 1);
  RunRecord rec;
  rec.kind = "green";
  rec.add("gamma", w.gamma());

  if (mode == "identity") {
    const double delta = m.get_double("delta", 0.9);
    FiniteDomain dom = domain_from_manifest(m, dim);
    EnvTable env = materialize(EnvironmentView(seed, w), dom);
    KilledGreenOperator op = green_killed(env, delta);
    double worst = 0.0;
    for (const Site& z : dom.interior())
      worst = std::max(worst, std::abs(return_identity_residual(op, env, z)));
    rec.add("delta", delta);
    rec.add("sites", static_cast<double>(dom.interior().size()));
    Metric& mm = rec.add("identity_residual_max", worst);
    mm.bound_hi = 1e-10;
    rec.verdicts["green_identity"] = worst <= 1e-10;
  } else if (mode == "derivative") {
    const double delta = m.get_double("delta", 0.9);
    const std::int64_t instances = m.get_int("instances", 0);
    FiniteDomain dom = domain_from_manifest(m, dim);
    const auto& interior = dom.interior();
    double worst_rel = 0.0;
    double worst_boundary = 0.0;
    std::int64_t boundary_cases = 0;
    for (std::int64_t i = 0; i < instances; ++i) {
      RandomStream rng(split_seed(seed, static_cast<std::uint64_t>(i)));
      // redraw stencils whose analytic value is too small for a 1e-6-step
      // difference quotient to resolve at the requested relative accuracy
      for (int attempt = 0; attempt < 256; ++attempt) {
        EnvTable env = materialize(EnvironmentView(rng.next_u64(), w), dom);
        auto pick = [&] {
          return interior[static_cast<std::size_t>(rng.next_unit() * interior.size())];
        };
        Site x1 = pick(), x2 = pick(), x4 = pick();
        int dir = static_cast<int>(rng.next_unit() * 2 * dim);
        Site x3 = neighbor(x2, dir);
        DerivativePair pair = green_derivative_check(env, delta, x1, x2, x3, x4);
        if (dom.on_boundary(x3)) {
          ++boundary_cases;
          worst_boundary =
              std::max(worst_boundary, std::max(std::abs(pair.analytic), std::abs(pair.numeric)));
          break;
        }
        if (std::abs(pair.analytic) < 3e-5) continue;
        worst_rel = std::max(worst_rel,
                             std::abs(pair.numeric - pair.analytic) / std::abs(pair.analytic));
        break;
      }
    }
    rec.add("delta", delta);
    rec.add("instances", static_cast<double>(instances));
    rec.add("boundary_cases", static_cast<double>(boundary_cases));
    Metric& mm = rec.add("derivative_rel_err_max", worst_rel);
    mm.bound_hi = 1e-6;
    Metric& mb = rec.add("boundary_abs_max", worst_boundary);
    mb.bound_hi = 0.0;
    rec.verdicts["lemma2"] = worst_rel <= 1e-6 && worst_boundary == 0.0;
  } else if (mode == "fourier") {
    HomogeneousKernel kernel = homogeneous_stats(w);
    double fourier = green_fourier_origin(kernel);
    SeriesValue series = green_series_origin(kernel, m.get_int("horizon", -1));
    rec.add("k_m", kernel.k_m);
    rec.add("fourier_value", fourier);
    rec.add("series_value", series.value);
    rec.add("series_horizon", static_cast<double>(series.horizon));
    rec.add("series_tail_bound", series.tail_bound);
    double gap = std::abs(fourier - series.value);
    Metric& mm = rec.add("fourier_series_gap", gap);
    mm.bound_hi = series.tail_bound + 1e-8;
    rec.verdicts["fourier_series"] = gap <= series.tail_bound + 1e-8;
    if (dim == 1) rec.add("closed_form_1d", 1.0 / std::abs(kernel.drift[0]));
  } else if (mode == "symmetrize") {
    const double delta = m.get_double("delta", 0.9);
    HomogeneousKernel kernel = homogeneous_stats(w);
    FiniteDomain dom = domain_from_manifest(m, dim);
    double dev = symmetrize_check(kernel, delta, dom);
    rec.add("delta", delta);
    rec.add("k_m", kernel.k_m);
    Metric& mm = rec.add("symmetrize_dev_max", dev);
    mm.bound_hi = 1e-10;
    rec.verdicts["formula5"] = dev <= 1e-10;
  } else if (mode == "return") {
    FiniteDomain dom = domain_from_manifest(m, dim);
    Site z0 = site_from_manifest(m, "z0", dim);
    const std::int64_t samples = m.get_int("samples", 0);
    GreenReturnEstimate est = mean_green_return(w, dom, z0, samples, seed, workers);
    rec.add("samples", static_cast<double>(samples));
    Metric& mm = rec.add("green_return_mean", est.estimate);
    mm.sigma = est.std_error;
    if (est.bound) {
      mm.bound_hi = *est.bound;
      rec.add("bound", *est.bound);
      rec.add("bound_direction", static_cast<double>(*est.bound_direction));
      rec.add("bound_distance", static_cast<double>(*est.bound_distance));
      rec.verdicts["lemma3"] = est.estimate <= *est.bound + 3.0 * est.std_error;
    }
  } else {
    throw Error("unknown green mode: " + mode);
  }
  return rec;
}

// ------------------------- experiment: kalikow -------------------------

inline RunRecord run_kalikow(const Manifest& m, int workers) {
  const int dim = static_cast<int>(m.get_int("dim", 0));
  auto alphas = m.get_doubles("alphas");
  WeightVector w(dim, std::span<const double>(alphas.data(), alphas.size()));
  const double delta = m.get_double("delta", 0.0);
  const std::int64_t samples = m.get_int("samples", 0);
  const std::uint64_t seed = m.get_seed("seed", 1);
  FiniteDomain dom = domain_from_manifest(m, dim);
  Site z0 = site_from_manifest(m, "z0", dim);

  KalikowEstimate est = estimate_kalikow(w, dom, z0, delta, samples, seed, workers);
  std::vector<BoundInterval> bounds = prop2_bounds(w);
  DriftBox box = theorem1_drift_box(w);

  double row_dev = 0.0;
  double kernel_violation_sigmas = 0.0;
  double drift_violation_sigmas = 0.0;
  const int n = static_cast<int>(dom.interior().size());
  for (int z = 0; z < n; ++z) {
    const KalikowSiteRow& row = est.rows[z];
    row_dev = std::max(row_dev, std::abs(est.row_sum(z) - 1.0));
    for (int dir = 0; dir < 2 * dim; ++dir) {
      const BoundInterval& b = bounds[dir];
      if (b.vacuous) continue;
      double excess = std::max(b.lo - row.kernel[dir], row.kernel[dir] - b.hi);
      if (excess > 0.0) {
        double se = std::max(row.kernel_se[dir], 1e-300);
        kernel_violation_sigmas = std::max(kernel_violation_sigmas, excess / se);
      }
    }
    if (!box.vacuous)
      for (int a = 0; a < dim; ++a) {
        double excess = std::max(box.lo[a] - row.drift[a], row.drift[a] - box.hi[a]);
        if (excess > 0.0) {
          double se = std::max(row.drift_se[a], 1e-300);
          drift_violation_sigmas = std::max(drift_violation_sigmas, excess / se);
        }
      }
  }

  RunRecord rec;
  rec.kind = "kalikow";
  rec.add("gamma", w.gamma());
  rec.add("delta", delta);
  rec.add("sites", static_cast<double>(n));
  rec.add("samples", static_cast<double>(samples));
  Metric& rd = rec.add("row_sum_dev_max", row_dev);
  rd.bound_hi = 1e-12;
  int iz = dom.interior_index(z0);
  for (int dir = 0; dir < 2 * dim; ++dir) {
    Metric& k = rec.add("kernel_z0_" + std::to_string(dir), est.rows[iz].kernel[dir]);
    k.sigma = est.rows[iz].kernel_se[dir];
    if (!bounds[dir].vacuous) {
      k.bound_lo = bounds[dir].lo;
      k.bound_hi = bounds[dir].hi;
    }
  }
  for (int a = 0; a < dim; ++a) {
    Metric& d = rec.add("drift_z0_" + std::to_string(a + 1), est.rows[iz].drift[a]);
    d.sigma = est.rows[iz].drift_se[a];
    if (!box.vacuous) {
      d.bound_lo = box.lo[a];
      d.bound_hi = box.hi[a];
    }
  }
  Metric& kv = rec.add("kernel_violation_sigmas", kernel_violation_sigmas);
  kv.bound_hi = 3.0;
  Metric& dv = rec.add("drift_violation_sigmas", drift_violation_sigmas);
  dv.bound_hi = 3.0;
  rec.add("drift_box_excludes_zero", box.excludes_zero ? 1.0 : 0.0);
  bool vacuous = bounds[0].vacuous;
  rec.verdicts["prop2"] =
      row_dev <= 1e-12 && (vacuous || kernel_violation_sigmas <= 3.0);
  if (!box.vacuous) rec.verdicts["theorem1"] = drift_violation_sigmas <= 3.0;
  return rec;
}

// ------------------------- experiment: expansion -------------------------

inline RunRecord run_expansion(const Manifest& m, int workers) {
  const int dim = static_cast<int>(m.get_int("dim", 0));
  auto alphas = m.get_doubles("alphas");
  WeightVector w(dim, std::span<const double>(alphas.data(), alphas.size()));
  const std::int64_t steps = m.get_int("steps", 0);
  const std::int64_t runs = m.get_int("runs", 0);
  const std::uint64_t seed = m.get_seed("seed", 1);

  ExpansionReport rep = expansion_velocity(w);
  VelocityEstimate est = estimate_velocity(w, steps, runs, seed, workers);

  RunRecord rec;
  rec.kind = "expansion";
  rec.add("gamma", rep.gamma);
  rec.add("green_origin", rep.green_origin);
  rec.add("eta", rep.kernel.eta_m);
  rec.add("eta_over_gamma", rep.eta_over_gamma);
  rec.add("precondition_ok", rep.precondition_ok ? 1.0 : 0.0);
  double dev2 = 0.0, se2 = 0.0;
  for (int a = 0; a < dim; ++a) {
    rec.add("center_" + std::to_string(a + 1), rep.center[a]);
    Metric& v = rec.add("velocity_" + std::to_string(a + 1), est.mean[a]);
    v.sigma = est.std_error[a];
    double d = est.mean[a] - rep.center[a];
    dev2 += d * d;
    se2 += est.std_error[a] * est.std_error[a];
  }
  double deviation = std::sqrt(dev2);
  double se_norm = std::sqrt(se2);
  Metric& dm = rec.add("deviation_l2", deviation);
  dm.sigma = se_norm;
  if (rep.error_bound) {
    rec.add("error_bound", *rep.error_bound);
    dm.bound_hi = *rep.error_bound + 3.0 * se_norm;
    rec.verdicts["prop3"] = deviation <= *rep.error_bound + 3.0 * se_norm;
  } else {
    rec.verdicts["prop3"] = false;  // precondition failed: nothing is certified
  }
  if (dim == 1 && theorem1_condition(w)) {
    Consistency1d c = expansion_consistency_1d(w);
    rec.add("exact_velocity", c.exact);
    Metric& cd = rec.add("center_exact_gap", c.diff);
    cd.bound_hi = 1e-12;
    rec.verdicts["exact1d"] = c.diff <= 1e-12;
  }
  return rec;
}

// ------------------------- experiment: verify -------------------------

inline RunRecord run_manifest(const Manifest& m, int workers);

// Curated battery across every experiment kind, small enough for a quick
// smoke run; quick = false scales the sampling up roughly tenfold.
inline RunRecord run_verify(const Manifest& m, int workers) {
  const bool quick = m.get_bool("quick", true);
  const std::uint64_t seed = m.get_seed("seed", 1);
  const int scale = quick ? 1 : 10;
  auto sub = [&](std::string text) {
    std::istringstream in(text);
    Manifest sm = Manifest::parse(in, "<verify>");
    validate_manifest(sm);
    return run_manifest(sm, workers);
  };
  std::string s = std::to_string(seed);
  std::vector<RunRecord> parts;
  parts.push_back(sub("kind = velocity\ndim = 1\nalphas = 3,1\nsteps = 2000\nruns = " +
                      std::to_string(200 * scale) + "\nseed = " + s));
  parts.push_back(sub("kind = equivalence\ndim = 1\nalphas = 2,1.5\npath_length = 3\nruns = " +
                      std::to_string(20000 * scale) + "\nseed = " + s));
  parts.push_back(sub("kind = green\nmode = identity\ndim = 2\nalphas = 1,2,0.5,1.5\n"
                      "delta = 0.9\nradius = 3\nseed = " + s));
  parts.push_back(sub("kind = green\nmode = derivative\ndim = 2\nalphas = 2,2,1,1\n"
                      "delta = 0.9\nradius = 2\ninstances = " + std::to_string(5 * scale) +
                      "\nseed = " + s));
  parts.push_back(sub("kind = green\nmode = fourier\ndim = 2\nalphas = 4,2,2,2\nseed = " + s));
  parts.push_back(sub("kind = green\nmode = symmetrize\ndim = 2\nalphas = 4,2,2,2\n"
                      "delta = 0.9\nradius = 3\nseed = " + s));
  parts.push_back(sub("kind = green\nmode = return\ndim = 1\nalphas = 1.5,1\nsegment = 0,5\n"
                      "z0 = 1\nsamples = " + std::to_string(2000 * scale) + "\nseed = " + s));
  parts.push_back(sub("kind = kalikow\ndim = 1\nalphas = 2.5,1\ndelta = 0.9\nsegment = -3,3\n"
                      "z0 = 0\nsamples = " + std::to_string(3000 * scale) + "\nseed = " + s));
  parts.push_back(sub("kind = expansion\ndim = 1\nalphas = 75,25\nsteps = 5000\nruns = " +
                      std::to_string(200 * scale) + "\nseed = " + s));

  RunRecord rec;
  rec.kind = "verify";
  rec.add("quick", quick ? 1.0 : 0.0);
  rec.add("experiments", static_cast<double>(parts.size()));
  std::int64_t passed = 0, failed = 0;
  for (const RunRecord& part : parts)
    for (const auto& [name, ok] : part.verdicts) {
      // same-named verdicts from different experiments are AND-ed together
      auto it = rec.verdicts.find(name);
      if (it == rec.verdicts.end())
        rec.verdicts[name] = ok;
      else
        it->second = it->second && ok;
      (ok ? passed : failed) += 1;
    }
  rec.add("checks_passed", static_cast<double>(passed));
  rec.add("checks_failed", static_cast<double>(failed));
  return rec;
}

// ------------------------- dispatch -------------------------

inline RunRecord run_manifest(const Manifest& m, int workers) {
  validate_manifest(m);
  auto t0 = std::chrono::steady_clock::now();
  std::string kind = m.get_string("kind");
  RunRecord rec;
  if (kind == "velocity")
    rec = run_velocity(m, workers);
  else if (kind == "equivalence")
    rec = run_equivalence(m, workers);
  else if (kind == "green")
    rec = run_green(m, workers);
  else if (kind == "kalikow")
    rec = run_kalikow(m, workers);
  else if (kind == "expansion")
    rec = run_expansion(m, workers);
  else if (kind == "verify")
    rec = run_verify(m, workers);
  else
    throw Error("unknown manifest kind: " + kind);
  rec.manifest_digest = manifest_digest(m);
  rec.manifest_source = m.source();
  rec.workers = resolve_workers(workers);
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  rec.created = buf;
  return rec;
}

}  // namespace rwre
