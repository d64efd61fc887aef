// SPDX-License-Identifier: Apache-2.0
//
// Declarative run configuration. INI-style text:
//
//   [model]
//   potential = quartic1d        # quartic1d | coupled2d | harmonic | custom
//   v = 1
//   sigma = 1                    # m x d, row-major
//   x0 = 1, 1                    # p_1..p_m, q_1..q_m
//
//   [experiment]
//   h_list = 2^-5, 2^-6, 2^-7
//
// Lines starting with '#' or ';' are comments; arrays are comma lists; step
// sizes accept `c*b^e` as well as plain decimals.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "avf/integrators.hpp"

namespace avf {

enum class ExperimentKind {
  simulate,
  converge_strong,
  converge_density,
  malliavin_diagnose,
  energy_check,
  expmoment_check,
};

std::string_view to_string(ExperimentKind kind);  // hyphenated CLI name
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);

struct ExperimentSection {
  std::optional<ExperimentKind> kind;
  double T = 1.0;
  std::vector<double> h_list{0x1.0p-5, 0x1.0p-6, 0x1.0p-7, 0x1.0p-8, 0x1.0p-9};
  double h_ref = 0x1.0p-12;
  std::size_t samples = 2000;
  std::uint64_t seed = 1;
  std::optional<double> beta;  // default: max(sum |sigma_k|^2, admissible minimum)
  double bandwidth_scale = 1.0;  // rho = bandwidth_scale * h
  int grid_nodes = 0;            // 0: per-dimension default
  std::size_t fd_pairs = 20;
  double fd_eps = 1e-5;
  std::size_t bootstrap = 200;
};

struct OutputSection {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  LangevinModel model;
  Scheme scheme = Scheme::avf_split;
  SolverOptions solver;
  ExperimentSection experiment;
  OutputSection output;
  std::string source;  // original text, hashed into the summary
};

struct ConfigIssue {
  int line = 0;  // 0: not tied to a line
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  std::vector<ConfigIssue> issues;
};

/// Parses and validates; throws ConfigError listing every problem found.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Parses `2^-5`, `3*2^-7`, `0.125`, `1e-3`. Empty optional on syntax error.
std::optional<double> parse_number(std::string_view text);

/// Git blob hash: sha1("blob <size>\0" + content), lowercase hex.
std::string git_blob_hash(std::string_view content);

struct RunOverrides {
  std::optional<ExperimentKind> kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned threads = 0;
};

/// Executes the experiment and writes summary.json plus CSVs into the output
/// directory. Returns 0 on success, 1 for configuration problems, 2 when the
/// experiment itself fails (e.g. too many Newton aborts).
int run(const RunConfig& config, const RunOverrides& overrides, std::ostream& log);

}  // namespace avf
