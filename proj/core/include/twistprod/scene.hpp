#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twistprod/immersion.hpp"
#include "twistprod/products.hpp"
#include "twistprod/theorems.hpp"

namespace twistprod {

struct NamedMetric {
  std::string name;
  MetricField metric;
};

struct NamedScalar {
  std::string name;
  ScalarField field;
};

struct NamedMap {
  std::string name;
  SmoothMap map;
};

struct NamedProduct {
  std::string name;
  DoublyTwistedProduct product;
  /// Kind stated in the scene, if any (already checked against the twists).
  std::optional<ProductKind> declared;
};

/// Defaults from the [run] section.
struct RunSettings {
  std::vector<std::string> suites;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::optional<double> pivot_tolerance;
};

/// A fully resolved scene file. Objects keep declaration order within each
/// kind.
struct Scene {
  std::string name;  // file stem
  std::string path;
  std::vector<ChartDomain> charts;
  std::vector<NamedMetric> metrics;
  std::vector<NamedScalar> scalars;
  std::vector<NamedMap> maps;
  std::vector<NamedProduct> products;
  std::vector<DoublyTwistedImmersionScenario> scenarios;
  std::vector<ImmersionSetup> immersions;
  RunSettings run;

  const NamedProduct* find_product(const std::string& name) const;
};

/// Parses scene text (format in docs/scene_format.md). pivot_tolerance
/// overrides the [run] value for every metric. Throws SceneError with the
/// offending line.
Scene parse_scene(const std::string& text, const std::string& name,
                  std::optional<double> pivot_tolerance = std::nullopt);

/// Reads and parses a scene file; the scene name is the file stem.
Scene load_scene(const std::string& path, std::optional<double> pivot_tolerance = std::nullopt);

}  // namespace twistprod
