#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twistprod/report.hpp"
#include "twistprod/sampling.hpp"
#include "twistprod/scene.hpp"

namespace twistprod {

inline constexpr double kDefaultTolerance = 1e-8;

/// Suite names in run order.
const std::vector<std::string>& suite_names();

/// Command-line overrides; unset fields fall back to the scene's [run]
/// section and then to the defaults above.
struct RunOptions {
  std::vector<std::string> suites;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
};

struct SuiteResult {
  std::string suite;
  /// One report per subject the suite applies to.
  std::vector<VerificationReport> reports;
  /// Worst verdict over the reports.
  Verdict verdict() const;
};

struct RunResult {
  std::string scene;
  std::size_t samples = kDefaultSamples;
  std::uint64_t seed = kDefaultSeed;
  double tolerance = kDefaultTolerance;
  std::vector<SuiteResult> suites;

  /// 0 when every suite passes, otherwise the 1-based position of the first
  /// suite that did not pass (at most 63).
  int exit_code() const;
};

/// Expands "all" and comma lists into suite names in run order. Throws
/// std::invalid_argument on an unknown name.
std::vector<std::string> resolve_suites(const std::vector<std::string>& requested);

/// Runs the selected suites. With "all", only suites that apply to some
/// scene object run; a suite named explicitly without a subject gives an
/// ERRORED report.
RunResult run_scene(const Scene& scene, const RunOptions& options);

/// Report document for one suite (all its subjects).
std::string suite_json(const SuiteResult& suite, const RunResult& run,
                       bool include_timing = false);

/// Summary document over all suites.
std::string summary_json(const RunResult& run, bool include_timing = false);

/// Human-readable listing of every report plus a final tally.
std::string run_text(const RunResult& run, bool include_timing = false);

}  // namespace twistprod
