#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include "twistprod/error.hpp"
#include "twistprod/sampling.hpp"
#include "twistprod/theorems.hpp"

namespace twistprod {

namespace {

void require_factor_map(const std::string& scenario, const char* label, const SmoothMap& phi,
                        const MetricField& from, const MetricField& to) {
  if (phi.source().coordinates() != from.chart().coordinates() ||
      phi.target().coordinates() != to.chart().coordinates()) {
    throw Error(ErrorCode::kScenario, "scenario '" + scenario + "': " + label +
                                          " does not map between the factor charts");
  }
}

// phi1 x phi2 over the source product coordinates.
SmoothMap assemble(const DoublyTwistedProduct& source, const DoublyTwistedProduct& target,
                   const SmoothMap& phi1, const SmoothMap& phi2) {
  const auto& coords = source.chart().coordinates();
  std::vector<std::size_t> map1(source.n1()), map2(source.n2());
  std::iota(map1.begin(), map1.end(), 0);
  std::iota(map2.begin(), map2.end(), source.n1());
  std::vector<Expression> comps;
  for (const auto& c : phi1.components()) comps.push_back(c.rebind(coords, map1));
  for (const auto& c : phi2.components()) comps.push_back(c.rebind(coords, map2));
  return SmoothMap(source.chart(), target.chart(), std::move(comps));
}

ScalarField compose(const ScalarField& rho, const SmoothMap& map) {
  return ScalarField(map.source(), rho.expression().substitute(map.components()));
}

ScalarField log_of(const ScalarField& f) {
  return ScalarField(f.chart(), apply(Function::kLn, f.expression()));
}

// Twisted and direct immersion setups of the assembled map.
std::pair<ImmersionSetup, ImmersionSetup> setups(const std::string& name,
                                                 const DoublyTwistedProduct& source,
                                                 const DoublyTwistedProduct& target,
                                                 const SmoothMap& map) {
  const BlockSplit split{source.n1(), source.n2()};
  const BlockSplit target_split{target.n1(), target.n2()};
  ImmersionSetup twisted{name + ".twisted", source.assembled(), target.assembled(), map, split,
                         target_split};
  ImmersionSetup direct{name + ".direct", source.direct(), target.direct(), map, split,
                        target_split};
  twisted.validate();
  direct.validate();
  return {std::move(twisted), std::move(direct)};
}

}  // namespace

DoublyTwistedImmersionScenario build_scenario(std::string name, DoublyTwistedProduct source,
                                              DoublyTwistedProduct target, SmoothMap phi1,
                                              SmoothMap phi2) {
  require_factor_map(name, "phi1", phi1, source.g1(), target.g1());
  require_factor_map(name, "phi2", phi2, source.g2(), target.g2());
  DoublyTwistedImmersionScenario s;
  s.name_ = std::move(name);
  SmoothMap map = assemble(source, target, phi1, phi2);
  s.composed_rho1_ = compose(target.sigma1(), map);
  s.composed_rho2_ = compose(target.sigma2(), map);
  s.log_rho1_ = log_of(target.sigma1());
  s.log_rho2_ = log_of(target.sigma2());
  s.source_ = std::move(source);
  s.target_ = std::move(target);
  s.phi1_ = std::move(phi1);
  s.phi2_ = std::move(phi2);
  std::tie(s.twisted_, s.direct_) = setups(s.name_, s.source_, s.target_, map);
  return s;
}

DoublyTwistedImmersionScenario build_scenario_derived(std::string name, MetricField g1,
                                                      MetricField g2,
                                                      DoublyTwistedProduct target,
                                                      SmoothMap phi1, SmoothMap phi2) {
  require_factor_map(name, "phi1", phi1, g1, target.g1());
  require_factor_map(name, "phi2", phi2, g2, target.g2());
  // The assembled map needs the source product chart, which only depends on
  // the factor charts; build it from a provisional product with unit twists.
  const ChartDomain chart = ChartDomain::product(name + ".source", g1.chart(), g2.chart());
  const Expression one = Expression::literal(1.0, chart.coordinates());
  DoublyTwistedProduct provisional =
      build_doubly_twisted(name + ".source", g1, g2, one, one, 1);
  SmoothMap map = assemble(provisional, target, phi1, phi2);
  ScalarField sigma1 = compose(target.sigma1(), map);
  ScalarField sigma2 = compose(target.sigma2(), map);

  DoublyTwistedImmersionScenario s;
  s.name_ = std::move(name);
  s.source_ = build_doubly_twisted(s.name_ + ".source", std::move(g1), std::move(g2),
                                   sigma1.expression(), sigma2.expression());
  s.composed_rho1_ = std::move(sigma1);
  s.composed_rho2_ = std::move(sigma2);
  s.log_rho1_ = log_of(target.sigma1());
  s.log_rho2_ = log_of(target.sigma2());
  s.target_ = std::move(target);
  s.phi1_ = std::move(phi1);
  s.phi2_ = std::move(phi2);
  s.sigma_derived_ = true;
  std::tie(s.twisted_, s.direct_) = setups(s.name_, s.source_, s.target_, map);
  return s;
}

DoublyTwistedImmersionScenario::Validation DoublyTwistedImmersionScenario::validate(
    std::size_t samples, std::uint64_t seed) const {
  Validation v;
  for (const auto& x : sample_points(source_.chart(), samples, seed)) {
    v.sigma_residual = std::max({v.sigma_residual,
                                 std::abs(source_.sigma1().value(x) - composed_rho1_.value(x)),
                                 std::abs(source_.sigma2().value(x) - composed_rho2_.value(x))});
  }
  if (!(v.sigma_residual <= kStrictTolerance)) {
    std::ostringstream os;
    os << "scenario '" << name_ << "': declared twists differ from rho o phi by "
       << v.sigma_residual;
    throw Error(ErrorCode::kScenario, os.str());
  }
  v.isometry_residual = isometry_residual(twisted_, samples, seed);
  if (!(v.isometry_residual <= kIsometryTolerance)) {
    std::ostringstream os;
    os << "scenario '" << name_ << "': phi is not isometric for the twisted metrics (defect "
       << v.isometry_residual << ")";
    throw Error(ErrorCode::kNotIsometric, os.str());
  }
  return v;
}

}  // namespace twistprod
