#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "twistprod/expr.hpp"
#include "twistprod/geometry.hpp"
#include "twistprod/immersion.hpp"
#include "twistprod/runner.hpp"
#include "twistprod/scene.hpp"

namespace tp = twistprod;

namespace {

const tp::Scene& scene(const std::string& name) {
  static std::vector<std::pair<std::string, tp::Scene>> cache;
  for (const auto& [n, s] : cache)
    if (n == name) return s;
  cache.emplace_back(name, tp::load_scene(std::string(TWISTPROD_SCENE_DIR) + "/" + name + ".scene"));
  return cache.back().second;
}

void BM_ExpressionParse(benchmark::State& state) {
  const std::vector<std::string> vars = {"x", "y", "u", "v"};
  for (auto _ : state)
    benchmark::DoNotOptimize(tp::Expression::parse("exp(0.3*(x + y*v)) * cosh(u) + sin(x*y)^2", vars));
}
BENCHMARK(BM_ExpressionParse);

void BM_Jet2Evaluation(benchmark::State& state) {
  const tp::Expression e = tp::Expression::parse("exp(0.3*(x + y*v)) * cosh(u) + sin(x*y)^2",
                                                 {"x", "y", "u", "v"});
  const std::vector<double> x = {0.1, -0.2, 0.3, 0.4};
  for (auto _ : state) benchmark::DoNotOptimize(e.eval_jet2(x));
}
BENCHMARK(BM_Jet2Evaluation);

void BM_ChristoffelAssembled(benchmark::State& state) {
  const tp::MetricField g = scene("identity_twisted").products.at(0).product.assembled();
  const std::vector<double> x = {0.1, -0.2, 0.3, 0.4};
  for (auto _ : state) benchmark::DoNotOptimize(tp::christoffel(g, x));
}
BENCHMARK(BM_ChristoffelAssembled);

void BM_EvaluateImmersion(benchmark::State& state) {
  const tp::ImmersionSetup& setup = scene("clifford_torus").immersions.at(0);
  const std::vector<double> x = {0.3, 1.1};
  for (auto _ : state) benchmark::DoNotOptimize(tp::evaluate_immersion(setup, x));
}
BENCHMARK(BM_EvaluateImmersion);

void BM_RunSceneAll(benchmark::State& state) {
  const tp::Scene& s = scene("identity_twisted");
  tp::RunOptions opt;
  opt.samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tp::run_scene(s, opt));
}
BENCHMARK(BM_RunSceneAll)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
