#include "twistprod/sampling.hpp"

#include <random>

namespace twistprod {

std::vector<std::vector<double>> sample_points(const ChartDomain& chart, std::size_t count,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<double> p(chart.dimension());
    for (std::size_t i = 0; i < p.size(); ++i) {
      // 53 random bits, offset by half an ulp so u is never 0 or 1.
      const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
      const Interval& iv = chart.box()[i];
      p[i] = iv.lo + (iv.hi - iv.lo) * u;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::vector<double>> probe_grid(const ChartDomain& chart, std::size_t per_axis) {
  const std::size_t n = chart.dimension();
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> idx(n, 0);
  for (;;) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Interval& iv = chart.box()[i];
      p[i] = iv.lo + (iv.hi - iv.lo) * (static_cast<double>(idx[i]) + 0.5) /
                         static_cast<double>(per_axis);
    }
    out.push_back(std::move(p));
    std::size_t k = 0;
    while (k < n && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == n) break;
  }
  return out;
}

}  // namespace twistprod
