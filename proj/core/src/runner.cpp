#include "twistprod/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "twistprod/error.hpp"
#include "twistprod/theorems.hpp"

namespace twistprod {

namespace {

using Json = nlohmann::ordered_json;

Json real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

struct Job {
  std::string subject;
  std::function<VerificationReport()> run;
};

int rank(Verdict v) {
  switch (v) {
    case Verdict::kPass: return 0;
    case Verdict::kFail: return 1;
    case Verdict::kErrored: return 2;
  }
  return 2;
}

bool any_scenario(const Scene& scene, ProductKind kind) {
  return std::any_of(scene.scenarios.begin(), scene.scenarios.end(), [&](const auto& s) {
    return s.source().is(kind) && s.target().is(kind);
  });
}

// Subjects of a suite. all_mode keeps only scenarios whose products match a
// corollary's kind; an explicit request runs every scenario so a mismatch
// surfaces as an error.
std::vector<Job> jobs_for(const std::string& suite, const Scene& scene, std::size_t n,
                          std::uint64_t seed, double tol, bool all_mode) {
  std::vector<Job> jobs;
  if (suite == "prop1") {
    for (const auto& p : scene.products)
      jobs.push_back({p.name, [&p, n, seed, tol] { return verify_proposition1(p.product, n, seed, tol); }});
  } else if (suite == "axioms") {
    for (const auto& m : scene.metrics)
      jobs.push_back({m.name, [&m, n, seed, tol] { return verify_connection_axioms(m.metric, n, seed, tol); }});
    for (const auto& p : scene.products)
      jobs.push_back({p.name + ".assembled", [&p, n, seed, tol] {
                        return verify_connection_axioms(p.product.assembled(), n, seed, tol);
                      }});
  } else if (suite == "immersion") {
    for (const auto& im : scene.immersions)
      jobs.push_back({im.name, [&im, n, seed, tol] { return verify_immersion_invariants(im, n, seed, tol); }});
    for (const auto& s : scene.scenarios)
      jobs.push_back({s.twisted().name, [&s, n, seed, tol] {
                        return verify_immersion_invariants(s.twisted(), n, seed, tol);
                      }});
  } else if (suite == "moore") {
    for (const auto& im : scene.immersions)
      jobs.push_back({im.name, [&im, n, seed, tol] { return moore_forward_check(im, n, seed, tol); }});
  } else {
    using Fn = VerificationReport (*)(const DoublyTwistedImmersionScenario&, std::size_t,
                                      std::uint64_t, double);
    Fn fn = nullptr;
    std::optional<ProductKind> needs;
    if (suite == "hphi") fn = verify_hphi_decomposition;
    else if (suite == "thm31") fn = verify_thm31_inequality;
    else if (suite == "geodesic") fn = check_totally_geodesic_characterization;
    else if (suite == "minimality") fn = verify_minimality;
    else if (suite == "lemma") fn = verify_normal_gradient_lemma;
    else if (suite == "doubly_warped") fn = verify_corollary_doubly_warped, needs = ProductKind::kDoublyWarped;
    else if (suite == "chen") fn = verify_corollary_chen, needs = ProductKind::kWarped;
    else throw std::invalid_argument("unknown suite '" + suite + "'");
    for (const auto& s : scene.scenarios) {
      if (all_mode && needs && !(s.source().is(*needs) && s.target().is(*needs))) continue;
      jobs.push_back({s.name(), [&s, fn, n, seed, tol] { return fn(s, n, seed, tol); }});
    }
  }
  return jobs;
}

bool applies(const std::string& suite, const Scene& scene) {
  if (suite == "prop1") return !scene.products.empty();
  if (suite == "axioms") return !scene.metrics.empty() || !scene.products.empty();
  if (suite == "immersion") return !scene.immersions.empty() || !scene.scenarios.empty();
  if (suite == "moore") return !scene.immersions.empty();
  if (suite == "doubly_warped") return any_scenario(scene, ProductKind::kDoublyWarped);
  if (suite == "chen") return any_scenario(scene, ProductKind::kWarped);
  return !scene.scenarios.empty();
}

VerificationReport run_job(const Job& job, const std::string& suite, double tol,
                           std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport r;
  try {
    r = job.run();
  } catch (const std::exception& e) {
    r = VerificationReport(suite, tol, seed);
    r.set_error(e.what());
  }
  r.set_subject(job.subject);
  r.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Json suite_object(const SuiteResult& suite, bool include_timing) {
  Json j;
  j["suite"] = suite.suite;
  j["verdict"] = to_string(suite.verdict());
  auto reports = Json::array();
  for (const auto& r : suite.reports) reports.push_back(Json::parse(to_json(r, include_timing)));
  j["reports"] = std::move(reports);
  return j;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "prop1", "axioms",  "immersion",     "hphi", "thm31", "geodesic",
      "minimality", "lemma", "doubly_warped", "chen", "moore"};
  return names;
}

Verdict SuiteResult::verdict() const {
  Verdict v = Verdict::kPass;
  for (const auto& r : reports)
    if (rank(r.verdict()) > rank(v)) v = r.verdict();
  return v;
}

int RunResult::exit_code() const {
  for (std::size_t i = 0; i < suites.size(); ++i)
    if (suites[i].verdict() != Verdict::kPass) return static_cast<int>(std::min<std::size_t>(i + 1, 63));
  return 0;
}

std::vector<std::string> resolve_suites(const std::vector<std::string>& requested) {
  std::vector<std::string> wanted;
  for (const auto& item : requested) {
    std::stringstream ss(item);
    std::string name;
    while (std::getline(ss, name, ',')) {
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t") + 1);
      if (name.empty()) continue;
      if (name != "all" && std::find(suite_names().begin(), suite_names().end(), name) ==
                               suite_names().end())
        throw std::invalid_argument("unknown suite '" + name + "'");
      wanted.push_back(name);
    }
  }
  if (std::find(wanted.begin(), wanted.end(), "all") != wanted.end()) return {"all"};
  std::vector<std::string> out;
  for (const auto& n : suite_names())
    if (std::find(wanted.begin(), wanted.end(), n) != wanted.end()) out.push_back(n);
  return out;
}

RunResult run_scene(const Scene& scene, const RunOptions& options) {
  RunResult result;
  result.scene = scene.name;
  result.samples = options.samples.value_or(scene.run.samples.value_or(kDefaultSamples));
  result.seed = options.seed.value_or(scene.run.seed.value_or(kDefaultSeed));
  result.tolerance = options.tolerance.value_or(scene.run.tolerance.value_or(kDefaultTolerance));
  if (result.samples == 0) throw std::invalid_argument("samples must be positive");
  if (!(result.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");

  std::vector<std::string> requested = options.suites;
  if (requested.empty()) requested = scene.run.suites;
  if (requested.empty()) requested = {"all"};
  std::vector<std::string> suites = resolve_suites(requested);
  const bool all_mode = suites.size() == 1 && suites[0] == "all";
  if (all_mode) {
    suites.clear();
    for (const auto& n : suite_names())
      if (applies(n, scene)) suites.push_back(n);
  }

  for (const auto& name : suites) {
    SuiteResult sr;
    sr.suite = name;
    for (const auto& job :
         jobs_for(name, scene, result.samples, result.seed, result.tolerance, all_mode)) {
      VerificationReport r = run_job(job, name, result.tolerance, result.seed);
      r.set_scene(scene.name);
      sr.reports.push_back(std::move(r));
    }
    if (sr.reports.empty()) {
      VerificationReport r(name, result.tolerance, result.seed);
      r.set_scene(scene.name);
      r.set_error("scene '" + scene.name + "' has no object this suite applies to");
      sr.reports.push_back(std::move(r));
    }
    result.suites.push_back(std::move(sr));
  }
  return result;
}

std::string suite_json(const SuiteResult& suite, const RunResult& run, bool include_timing) {
  Json doc;
  doc["schema"] = "twistprod.suite/1";
  doc["version"] = version_string();
  doc["scene"] = run.scene;
  Json body = suite_object(suite, include_timing);
  for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
  return doc.dump(2) + "\n";
}

std::string summary_json(const RunResult& run, bool include_timing) {
  Json doc;
  doc["schema"] = "twistprod.summary/1";
  doc["version"] = version_string();
  doc["scene"] = run.scene;
  doc["samples"] = run.samples;
  doc["seed"] = run.seed;
  doc["tolerance"] = run.tolerance;
  doc["exit_code"] = run.exit_code();
  auto suites = Json::array();
  for (const auto& s : run.suites) {
    Json js;
    js["suite"] = s.suite;
    js["verdict"] = to_string(s.verdict());
    auto subjects = Json::array();
    for (const auto& r : s.reports) {
      Json jr;
      jr["subject"] = r.subject();
      jr["verdict"] = to_string(r.verdict());
      jr["max_residual"] = real(r.max_residual());
      jr["error"] = r.error().empty() ? Json(nullptr) : Json(r.error());
      if (include_timing) jr["wall_time_ms"] = r.wall_time_ms;
      subjects.push_back(std::move(jr));
    }
    js["subjects"] = std::move(subjects);
    suites.push_back(std::move(js));
  }
  doc["suites"] = std::move(suites);
  return doc.dump(2) + "\n";
}

std::string run_text(const RunResult& run, bool include_timing) {
  std::ostringstream os;
  os << "scene " << run.scene << " (samples " << run.samples << ", seed " << run.seed
     << ", tolerance " << run.tolerance << ")\n";
  std::size_t pass = 0;
  for (const auto& s : run.suites) {
    for (const auto& r : s.reports) os << to_text(r, include_timing);
    if (s.verdict() == Verdict::kPass) ++pass;
  }
  os << pass << "/" << run.suites.size() << " suites passed\n";
  return os.str();
}

}  // namespace twistprod
