#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rwre/errors.hpp"
#include "rwre/lattice.hpp"
#include "rwre/simplex.hpp"

namespace rwre {

// Experiment manifests are flat key = value files: one assignment per line,
// '#' starts a comment, blank lines are skipped.  Validation is eager and
// collects every problem before throwing, so a bad file reports all of its
// mistakes at once instead of one per run attempt.

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

class Manifest {
 public:
  static Manifest parse(std::istream& in, std::string source = "<stream>") {
    Manifest m;
    m.source_ = std::move(source);
    std::vector<std::string> issues;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::string text = detail::trim(line);
      if (text.empty()) continue;
      auto eq = text.find('=');
      if (eq == std::string::npos) {
        issues.push_back("line " + std::to_string(lineno) + ": expected key = value");
        continue;
      }
      std::string key = detail::trim(std::string_view(text).substr(0, eq));
      std::string value = detail::trim(std::string_view(text).substr(eq + 1));
      if (key.empty() || value.empty()) {
        issues.push_back("line " + std::to_string(lineno) + ": empty key or value");
        continue;
      }
      if (m.values_.count(key)) {
        issues.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        continue;
      }
      m.values_[key] = value;
    }
    if (!issues.empty()) throw ManifestInvalid(m.source_, issues);
    return m;
  }

  static Manifest load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest file: " + path);
    return parse(in, path);
  }

  const std::string& source() const { return source_; }
  const std::map<std::string, std::string>& values() const { return values_; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error("manifest key missing: " + key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::int64_t v = 0;
    parse_int(it->second, v);
    return v;
  }

  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc() || p != it->second.data() + it->second.size())
      throw Error("manifest key '" + key + "' is not an unsigned integer");
    return v;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = 0.0;
    parse_double(it->second, v);
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw Error("manifest key '" + key + "' is not a boolean");
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& part : detail::split_commas(raw(key))) {
      double v = 0.0;
      parse_double(part, v);
      out.push_back(v);
    }
    return out;
  }

  std::vector<int> get_ints(const std::string& key) const {
    std::vector<int> out;
    for (const std::string& part : detail::split_commas(raw(key))) {
      std::int64_t v = 0;
      parse_int(part, v);
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  // Canonical single-line rendering (sorted keys), the input of the digest.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) {
      out += k;
      out += '=';
      out += v;
      out += '\n';
    }
    return out;
  }

 private:
  static void parse_int(const std::string& text, std::int64_t& v) {
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
      throw Error("not an integer: '" + text + "'");
  }

  static void parse_double(const std::string& text, double& v) {
    try {
      std::size_t pos = 0;
      v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw Error("not a number: '" + text + "'");
    }
  }

  std::string source_;
  std::map<std::string, std::string> values_;
};

// ------------------------- per-kind validation -------------------------

struct FieldRule {
  std::string key;
  enum Type { kInt, kUint, kDouble, kBool, kDoubles, kInts, kString } type;
  bool required = false;
};

inline const std::map<std::string, std::vector<FieldRule>>& manifest_schema() {
  using T = FieldRule::Type;
  static const std::map<std::string, std::vector<FieldRule>> schema = {
      {"velocity",
       {{"dim", T::kInt, true},
        {"alphas", T::kDoubles, true},
        {"steps", T::kInt, true},
        {"runs", T::kInt, true},
        {"seed", T::kUint, false},
        {"dump_runs", T::kBool, false}}},
      {"equivalence",
       {{"dim", T::kInt, true},
        {"alphas", T::kDoubles, true},
        {"path_length", T::kInt, true},
        {"runs", T::kInt, true},
        {"oracle_runs", T::kInt, false},
        {"seed", T::kUint, false}}},
      {"green",
       {{"mode", T::kString, true},
        {"dim", T::kInt, true},
        {"alphas", T::kDoubles, true},
        {"delta", T::kDouble, false},
        {"radius", T::kInt, false},
        {"segment", T::kInts, false},
        {"z0", T::kInts, false},
        {"samples", T::kInt, false},
        {"horizon", T::kInt, false},
        {"instances", T::kInt, false},
        {"seed", T::kUint, false}}},
      {"kalikow",
       {{"dim", T::kInt, true},
        {"alphas", T::kDoubles, true},
        {"delta", T::kDouble, true},
        {"radius", T::kInt, false},
        {"segment", T::kInts, false},
        {"z0", T::kInts, true},
        {"samples", T::kInt, true},
        {"seed", T::kUint, false}}},
      {"expansion",
       {{"dim", T::kInt, true},
        {"alphas", T::kDoubles, true},
        {"steps", T::kInt, true},
        {"runs", T::kInt, true},
        {"seed", T::kUint, false}}},
      {"verify",
       {{"quick", T::kBool, false}, {"seed", T::kUint, false}}},
  };
  return schema;
}

// Structural validation: kind is known, required keys are present, no stray
// keys, every value parses as its declared type, and the handful of cross
// checks (dimension ranges, alphas length) hold.  Throws ManifestInvalid
// carrying the full list of complaints.
inline void validate_manifest(const Manifest& m) {
  std::vector<std::string> issues;
  std::string kind = m.get_string("kind");
  const auto& schema = manifest_schema();
  auto kit = schema.find(kind);
  if (kind.empty()) {
    issues.push_back("missing required key 'kind'");
  } else if (kit == schema.end()) {
    std::string known;
    for (const auto& [k, rules] : schema) known += (known.empty() ? "" : ", ") + k;
    issues.push_back("unknown kind '" + kind + "' (expected one of: " + known + ")");
  }
  if (kit != schema.end()) {
    std::set<std::string> allowed = {"kind"};
    for (const FieldRule& rule : kit->second) {
      allowed.insert(rule.key);
      if (rule.required && !m.has(rule.key)) {
        issues.push_back("missing required key '" + rule.key + "'");
        continue;
      }
      if (!m.has(rule.key)) continue;
      try {
        switch (rule.type) {
          case FieldRule::kInt: m.get_int(rule.key, 0); break;
          case FieldRule::kUint: m.get_seed(rule.key, 0); break;
          case FieldRule::kDouble: m.get_double(rule.key, 0.0); break;
          case FieldRule::kBool: m.get_bool(rule.key, false); break;
          case FieldRule::kDoubles: m.get_doubles(rule.key); break;
          case FieldRule::kInts: m.get_ints(rule.key); break;
          case FieldRule::kString: break;
        }
      } catch (const Error& e) {
        issues.push_back(std::string("key '") + rule.key + "': " + e.what());
      }
    }
    for (const auto& [key, value] : m.values())
      if (!allowed.count(key)) issues.push_back("unknown key '" + key + "'");
  }

  // semantic checks, only meaningful once the fields themselves parse
  if (issues.empty() && kit != schema.end() && kind != "verify") {
    std::int64_t dim = m.get_int("dim", 0);
    if (dim < 1 || dim > kMaxDim)
      issues.push_back("dim must be between 1 and " + std::to_string(kMaxDim));
    else {
      auto alphas = m.get_doubles("alphas");
      if (static_cast<std::int64_t>(alphas.size()) != 2 * dim)
        issues.push_back("alphas must list exactly " + std::to_string(2 * dim) +
                         " values for dim " + std::to_string(dim));
      else
        for (double a : alphas)
          if (!(a > 0.0)) {
            issues.push_back("alphas must all be positive");
            break;
          }
    }
    auto positive = [&](const char* key) {
      if (m.has(key) && m.get_int(key, 0) < 1)
        issues.push_back(std::string("key '") + key + "' must be positive");
    };
    positive("steps");
    positive("runs");
    positive("samples");
    positive("instances");
    positive("oracle_runs");
    positive("path_length");
    if (m.has("radius") && m.get_int("radius", 0) < 1)
      issues.push_back("radius must be positive");
    if (m.has("delta")) {
      double delta = m.get_double("delta", 0.0);
      if (!(delta > 0.0) || delta > 1.0) issues.push_back("delta must lie in (0, 1]");
    }
    if (m.has("segment")) {
      auto seg = m.get_ints("segment");
      if (seg.size() != 2 || seg[0] >= seg[1])
        issues.push_back("segment must be 'lo,hi' with lo < hi");
      if (dim != 1) issues.push_back("segment domains are one-dimensional");
    }
    if (m.has("z0") && dim >= 1 && dim <= kMaxDim) {
      auto z = m.get_ints("z0");
      if (static_cast<std::int64_t>(z.size()) != dim)
        issues.push_back("z0 must list exactly " + std::to_string(dim) + " coordinates");
    }
    if (m.has("radius") && m.has("segment"))
      issues.push_back("give either radius or segment, not both");
    if (kind == "kalikow" && !m.has("radius") && !m.has("segment"))
      issues.push_back("kalikow needs a domain: radius or segment");
    if (kind == "green") {
      static const std::set<std::string> modes = {"identity", "derivative", "fourier",
                                                  "symmetrize", "return"};
      std::string mode = m.get_string("mode");
      if (!modes.count(mode))
        issues.push_back("mode must be one of identity, derivative, fourier, symmetrize, return");
      if ((mode == "identity" || mode == "symmetrize" || mode == "derivative") &&
          !m.has("radius") && !m.has("segment"))
        issues.push_back("green mode '" + mode + "' needs a domain: radius or segment");
      if (mode == "return") {
        if (!m.has("samples")) issues.push_back("green mode 'return' needs samples");
        if (!m.has("z0")) issues.push_back("green mode 'return' needs z0");
        if (!m.has("radius") && !m.has("segment"))
          issues.push_back("green mode 'return' needs a domain: radius or segment");
      }
      if (mode == "derivative" && !m.has("instances"))
        issues.push_back("green mode 'derivative' needs instances");
    }
  }
  if (!issues.empty()) throw ManifestInvalid(m.source(), issues);
}

inline Manifest load_validated(const std::string& path) {
  Manifest m = Manifest::load(path);
  validate_manifest(m);
  return m;
}

// Builds the finite domain a manifest describes: a centered box of the given
// radius, or (d = 1 only) an explicit lattice segment.
inline FiniteDomain domain_from_manifest(const Manifest& m, int dim) {
  if (m.has("segment")) {
    auto seg = m.get_ints("segment");
    return FiniteDomain::segment(seg[0], seg[1]);
  }
  return FiniteDomain::box(origin(dim), static_cast<int>(m.get_int("radius", 0)));
}

inline Site site_from_manifest(const Manifest& m, const std::string& key, int dim) {
  auto coords = m.get_ints(key);
  return Site(dim, std::span<const int>(coords.data(), coords.size()));
}

}  // namespace rwre
