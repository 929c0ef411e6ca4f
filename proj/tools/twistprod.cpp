#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "twistprod/error.hpp"
#include "twistprod/runner.hpp"
#include "twistprod/scene.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 64;
constexpr int kLoadError = 65;

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("TWISTPROD_SEED");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const unsigned long long s = std::strtoull(v, &end, 10);
  if (*end != '\0' || v[0] == '-') throw std::invalid_argument("TWISTPROD_SEED must be a non-negative integer");
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of doubly twisted product immersions"};
  app.set_version_flag("--version", twistprod::version_string());
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "Run verification suites on a scene file");
  std::string scene_path;
  std::vector<std::string> suites;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::optional<double> pivot;
  std::string report_dir;
  bool no_files = false;
  bool timings = false;
  std::string format = "text";

  verify->add_option("scene", scene_path, "Scene file")->required()->check(CLI::ExistingFile);
  verify->add_option("--suite", suites,
                     "Suite name, comma list or 'all' (repeatable). Names: prop1, axioms, "
                     "immersion, hphi, thm31, geodesic, minimality, lemma, doubly_warped, chen, moore");
  verify->add_option("--samples", samples, "Sample points per suite (default 50)")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed, "Sampling seed (default 42, or TWISTPROD_SEED)");
  verify->add_option("--tolerance", tolerance, "Residual tolerance (default 1e-8)")
      ->check(CLI::PositiveNumber);
  verify->add_option("--pivot-tolerance", pivot, "Smallest accepted LDL^T pivot of a metric")
      ->check(CLI::PositiveNumber);
  verify->add_option("--report", report_dir,
                     "Directory for report documents (default: reports/ beside the scene)");
  verify->add_flag("--no-report-files", no_files, "Print only, write no report documents");
  verify->add_option("--format", format, "Stdout format")
      ->check(CLI::IsMember({"text", "json"}));
  verify->add_flag("--timings", timings, "Include wall time in output and documents");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  twistprod::RunOptions options;
  options.suites = suites;
  options.samples = samples;
  options.tolerance = tolerance;
  try {
    options.seed = seed ? seed : seed_from_env();
  } catch (const std::exception& e) {
    std::cerr << "twistprod: " << e.what() << "\n";
    return kUsageError;
  }

  twistprod::Scene scene;
  try {
    scene = twistprod::load_scene(scene_path, pivot);
  } catch (const std::exception& e) {
    std::cerr << "twistprod: " << scene_path << ": " << e.what() << "\n";
    return kLoadError;
  }

  twistprod::RunResult result;
  try {
    result = twistprod::run_scene(scene, options);
  } catch (const std::invalid_argument& e) {
    std::cerr << "twistprod: " << e.what() << "\n";
    return kUsageError;
  }

  if (format == "json") {
    std::cout << twistprod::summary_json(result, timings);
  } else {
    std::cout << twistprod::run_text(result, timings);
  }

  if (!no_files) {
    try {
      const fs::path dir = report_dir.empty() ? fs::path(scene_path).parent_path() / "reports"
                                              : fs::path(report_dir);
      fs::create_directories(dir);
      for (const auto& s : result.suites)
        write_file(dir / (result.scene + "." + s.suite + ".report.json"),
                   twistprod::suite_json(s, result, timings));
      write_file(dir / (result.scene + ".summary.json"), twistprod::summary_json(result, timings));
      if (format == "text") std::cout << "reports written to " << dir.string() << "\n";
    } catch (const std::exception& e) {
      std::cerr << "twistprod: " << e.what() << "\n";
      return kLoadError;
    }
  }
  return result.exit_code();
}
