#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace twistprod {

enum class Verdict { kPass, kFail, kErrored };

const char* to_string(Verdict v);

/// How a check's residual is judged.
///   kEquality:   passes iff residual <= tolerance.
///   kInequality: residual is a slack; passes iff slack >= -tolerance.
///   kIff:        residual is 0 when both sides of an equivalence agree and
///                1 otherwise; passes iff 0.
///   kDiagnostic: reported only, never affects the verdict.
enum class CheckKind { kEquality, kInequality, kIff, kDiagnostic };

const char* to_string(CheckKind k);

struct CheckRecord {
  std::size_t sample = 0;
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  bool passed = true;
};

struct Check {
  std::string name;
  CheckKind kind = CheckKind::kEquality;
  double tolerance = 0.0;
  std::string description;
  /// Worst record per sample index.
  std::map<std::size_t, CheckRecord> records;

  bool passed() const;
  /// Largest residual (equality, iff, diagnostic) or smallest slack
  /// (inequality) over all samples.
  double worst() const;
  std::size_t worst_sample() const;
};

/// Outcome of one verification suite: per-check records at sampled points,
/// diagnostics, and a verdict that passes iff every non-diagnostic check
/// is within tolerance and no error occurred.
class VerificationReport {
 public:
  VerificationReport() = default;
  VerificationReport(std::string suite, double tolerance, std::uint64_t seed);

  const std::string& suite() const { return suite_; }
  const std::string& scene() const { return scene_; }
  void set_scene(std::string scene) { scene_ = std::move(scene); }
  /// Scene object the suite ran on (product, scenario or immersion name).
  const std::string& subject() const { return subject_; }
  void set_subject(std::string subject) { subject_ = std::move(subject); }
  double tolerance() const { return tolerance_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t add_sample(std::vector<double> point);
  const std::vector<std::vector<double>>& samples() const { return samples_; }

  /// Declares a check (idempotent). Checks keep declaration order.
  void declare(const std::string& name, CheckKind kind, double tolerance,
               std::string description = {});
  /// Adds a record to a declared check; only the worst record per sample is
  /// kept.
  void record(const std::string& name, std::size_t sample, double lhs, double rhs,
              double residual, std::string label = {});
  /// Iff record: passes when lhs_holds == rhs_holds.
  void record_iff(const std::string& name, std::size_t sample, bool lhs_holds, bool rhs_holds,
                  std::string label = {});

  const std::vector<Check>& checks() const { return checks_; }
  const Check* find(const std::string& name) const;

  void set_diagnostic(const std::string& name, double value) { diagnostics_[name] = value; }
  const std::map<std::string, double>& diagnostics() const { return diagnostics_; }
  void add_note(std::string note) { notes_.push_back(std::move(note)); }
  const std::vector<std::string>& notes() const { return notes_; }

  void set_error(std::string message) { error_ = std::move(message); }
  const std::string& error() const { return error_; }

  Verdict verdict() const;
  /// Largest residual over equality checks.
  double max_residual() const;
  /// Largest equality residual at one sample.
  double worst_residual_at(std::size_t sample) const;

  double wall_time_ms = 0.0;

 private:
  Check& get(const std::string& name);

  std::string suite_;
  std::string scene_;
  std::string subject_;
  double tolerance_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<double>> samples_;
  std::vector<Check> checks_;
  std::map<std::string, double> diagnostics_;
  std::vector<std::string> notes_;
  std::string error_;
};

/// Structured report document (schema in docs/report_schema.json). Wall
/// time is left out unless include_timing is set, so identical inputs give
/// byte-identical documents.
std::string to_json(const VerificationReport& report, bool include_timing = false);

/// Short human-readable summary, one line per check.
std::string to_text(const VerificationReport& report, bool include_timing = false);

std::string version_string();

}  // namespace twistprod
