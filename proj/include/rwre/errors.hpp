#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rwre {

// Base class so callers can catch toolkit errors in one net.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Normalizer sum(alpha) - 1 is zero or negative where a positive one is required.
struct DegenerateNormalizer : Error {
  using Error::Error;
};

struct WrongDimension : Error {
  using Error::Error;
};

// Weight vector outside the regime an identity needs (e.g. not ballistic).
struct WrongRegime : Error {
  using Error::Error;
};

// Derivative stencil sites violate adjacency/interiority requirements.
struct BadStencil : Error {
  using Error::Error;
};

// Linear solve failed or produced garbage; cannot happen for valid inputs.
struct SingularSystem : Error {
  using Error::Error;
};

// Quadrature did not stabilize within the node budget.
struct NonConvergent : Error {
  using Error::Error;
};

struct ExperimentFailed : Error {
  using Error::Error;
};

// Manifest parse/validation failure; carries one message per offending field.
struct ManifestInvalid : Error {
  std::string source;
  std::vector<std::string> issues;

  ManifestInvalid(std::string from, std::vector<std::string> problems)
      : Error(join(from, problems)), source(std::move(from)), issues(std::move(problems)) {}

 private:
  static std::string join(const std::string& from, const std::vector<std::string>& problems) {
    std::string all = "invalid manifest (" + from + ")";
    for (const auto& p : problems) {
      all += "\n  - ";
      all += p;
    }
    return all;
  }
};

}  // namespace rwre
