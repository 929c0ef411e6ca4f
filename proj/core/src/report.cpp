#include "twistprod/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#ifndef TWISTPROD_VERSION
#define TWISTPROD_VERSION "0.0.0"
#endif

namespace twistprod {

namespace {

bool record_passes(CheckKind kind, double tolerance, double residual) {
  switch (kind) {
    case CheckKind::kEquality:
      return residual <= tolerance;
    case CheckKind::kInequality:
      return residual >= -tolerance;
    case CheckKind::kIff:
      return residual == 0.0;
    case CheckKind::kDiagnostic:
      return true;
  }
  return false;
}

// Whether record a is worse than b for this kind of check.
bool worse(CheckKind kind, const CheckRecord& a, const CheckRecord& b) {
  if (kind == CheckKind::kInequality) return a.residual < b.residual;
  // NaN residuals always count as worse.
  if (std::isnan(a.residual)) return !std::isnan(b.residual);
  return a.residual > b.residual;
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "PASS";
    case Verdict::kFail: return "FAILED";
    case Verdict::kErrored: return "ERRORED";
  }
  return "?";
}

const char* to_string(CheckKind k) {
  switch (k) {
    case CheckKind::kEquality: return "equality";
    case CheckKind::kInequality: return "inequality";
    case CheckKind::kIff: return "iff";
    case CheckKind::kDiagnostic: return "diagnostic";
  }
  return "?";
}

bool Check::passed() const {
  if (kind == CheckKind::kDiagnostic) return true;
  return std::all_of(records.begin(), records.end(),
                     [](const auto& kv) { return kv.second.passed; });
}

double Check::worst() const {
  if (records.empty()) return 0.0;
  const CheckRecord* w = &records.begin()->second;
  for (const auto& [s, r] : records)
    if (worse(kind, r, *w)) w = &r;
  return w->residual;
}

std::size_t Check::worst_sample() const {
  if (records.empty()) return 0;
  const CheckRecord* w = &records.begin()->second;
  for (const auto& [s, r] : records)
    if (worse(kind, r, *w)) w = &r;
  return w->sample;
}

VerificationReport::VerificationReport(std::string suite, double tolerance, std::uint64_t seed)
    : suite_(std::move(suite)), tolerance_(tolerance), seed_(seed) {}

std::size_t VerificationReport::add_sample(std::vector<double> point) {
  samples_.push_back(std::move(point));
  return samples_.size() - 1;
}

void VerificationReport::declare(const std::string& name, CheckKind kind, double tolerance,
                                 std::string description) {
  for (const auto& c : checks_)
    if (c.name == name) return;
  Check c;
  c.name = name;
  c.kind = kind;
  c.tolerance = tolerance;
  c.description = std::move(description);
  checks_.push_back(std::move(c));
}

Check& VerificationReport::get(const std::string& name) {
  for (auto& c : checks_)
    if (c.name == name) return c;
  throw std::logic_error("undeclared check '" + name + "'");
}

const Check* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks_)
    if (c.name == name) return &c;
  return nullptr;
}

void VerificationReport::record(const std::string& name, std::size_t sample, double lhs,
                                double rhs, double residual, std::string label) {
  Check& c = get(name);
  CheckRecord r{sample, std::move(label), lhs, rhs, residual, true};
  r.passed = !std::isnan(residual) && record_passes(c.kind, c.tolerance, residual);
  auto it = c.records.find(sample);
  if (it == c.records.end()) {
    c.records.emplace(sample, std::move(r));
  } else if (worse(c.kind, r, it->second)) {
    it->second = std::move(r);
  }
}

void VerificationReport::record_iff(const std::string& name, std::size_t sample,
                                    bool lhs_holds, bool rhs_holds, std::string label) {
  record(name, sample, lhs_holds ? 1.0 : 0.0, rhs_holds ? 1.0 : 0.0,
         lhs_holds == rhs_holds ? 0.0 : 1.0, std::move(label));
}

Verdict VerificationReport::verdict() const {
  if (!error_.empty()) return Verdict::kErrored;
  for (const auto& c : checks_)
    if (!c.passed()) return Verdict::kFail;
  return Verdict::kPass;
}

double VerificationReport::max_residual() const {
  double m = 0.0;
  for (const auto& c : checks_) {
    if (c.kind != CheckKind::kEquality) continue;
    for (const auto& [s, r] : c.records) m = std::max(m, r.residual);
  }
  return m;
}

double VerificationReport::worst_residual_at(std::size_t sample) const {
  double m = 0.0;
  for (const auto& c : checks_) {
    if (c.kind != CheckKind::kEquality) continue;
    auto it = c.records.find(sample);
    if (it != c.records.end()) m = std::max(m, it->second.residual);
  }
  return m;
}

std::string to_json(const VerificationReport& report, bool include_timing) {
  nlohmann::ordered_json doc;
  doc["schema"] = "twistprod.report/1";
  doc["version"] = version_string();
  doc["scene"] = report.scene();
  doc["suite"] = report.suite();
  doc["subject"] = report.subject();
  doc["verdict"] = to_string(report.verdict());
  doc["tolerance"] = report.tolerance();
  doc["seed"] = report.seed();
  doc["sample_count"] = report.samples().size();
  doc["max_residual"] = number(report.max_residual());
  doc["error"] = report.error().empty() ? nlohmann::ordered_json(nullptr)
                                        : nlohmann::ordered_json(report.error());

  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks()) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["kind"] = to_string(c.kind);
    jc["tolerance"] = c.tolerance;
    jc["description"] = c.description;
    jc["passed"] = c.passed();
    jc["worst"] = number(c.worst());
    jc["worst_sample"] = c.worst_sample();
    auto records = nlohmann::ordered_json::array();
    for (const auto& [s, r] : c.records) {
      nlohmann::ordered_json jr;
      jr["sample"] = r.sample;
      if (!r.label.empty()) jr["label"] = r.label;
      jr["lhs"] = number(r.lhs);
      jr["rhs"] = number(r.rhs);
      jr["residual"] = number(r.residual);
      jr["passed"] = r.passed;
      records.push_back(std::move(jr));
    }
    jc["records"] = std::move(records);
    checks.push_back(std::move(jc));
  }
  doc["checks"] = std::move(checks);

  auto samples = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.samples().size(); ++i) {
    nlohmann::ordered_json js;
    js["index"] = i;
    js["point"] = report.samples()[i];
    js["worst_residual"] = number(report.worst_residual_at(i));
    samples.push_back(std::move(js));
  }
  doc["samples"] = std::move(samples);

  nlohmann::ordered_json diag = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.diagnostics()) diag[k] = number(v);
  doc["diagnostics"] = std::move(diag);
  doc["notes"] = report.notes();
  if (include_timing) doc["wall_time_ms"] = report.wall_time_ms;
  return doc.dump(2) + "\n";
}

std::string to_text(const VerificationReport& report, bool include_timing) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific;
  os << report.suite();
  if (!report.subject().empty()) os << " [" << report.subject() << "]";
  os << ": " << to_string(report.verdict()) << "  (max residual "
     << report.max_residual() << ", tolerance " << report.tolerance() << ", "
     << report.samples().size() << " samples, seed " << report.seed();
  if (include_timing) os << ", " << std::fixed << std::setprecision(1) << report.wall_time_ms << " ms";
  os << ")\n";
  os << std::scientific << std::setprecision(3);
  if (!report.error().empty()) os << "  error: " << report.error() << "\n";
  for (const auto& c : report.checks()) {
    const char* mark = c.kind == CheckKind::kDiagnostic ? "info"
                       : c.passed()                     ? "ok  "
                                                        : "FAIL";
    os << "  [" << mark << "] " << c.name << " (" << to_string(c.kind) << "): worst "
       << c.worst() << "\n";
  }
  for (const auto& n : report.notes()) os << "  note: " << n << "\n";
  return os.str();
}

std::string version_string() { return TWISTPROD_VERSION; }

}  // namespace twistprod
