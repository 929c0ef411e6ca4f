#pragma once

// Finite-difference oracles shared by the unit and acceptance tests. They
// use only values (never jets), so they are independent of the forward-mode
// derivatives under test.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "twistprod/geometry.hpp"
#include "twistprod/immersion.hpp"

namespace twistprod::testing {

using Fn = std::function<double(const std::vector<double>&)>;

inline std::string scene_path(const std::string& name) {
  return std::string(TWISTPROD_SCENE_DIR) + "/" + name + ".scene";
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline Eigen::VectorXd fd_gradient(const Fn& f, std::vector<double> x, double h = 1e-5) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    g[static_cast<Eigen::Index>(i)] = (fp - fm) / (2 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(const Fn& f, std::vector<double> x, double h = 1e-4) {
  const std::size_t n = x.size();
  Eigen::MatrixXd H(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
    std::vector<double> y = x;
    y[i] += di;
    y[j] += dj;
    return f(y);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) /
                       (4 * h * h);
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return H;
}

/// Christoffel symbols from central differences of the metric values.
inline Christoffel fd_christoffel(const MetricField& g, const std::vector<double>& x,
                                  double h = 1e-5) {
  const std::size_t n = g.dimension();
  std::vector<Eigen::MatrixXd> dg(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> p = x, m = x;
    p[k] += h;
    m[k] -= h;
    dg[k] = (g.evaluate(p) - g.evaluate(m)) / (2 * h);
  }
  const Eigen::MatrixXd ginv = g.evaluate(x).inverse();
  Christoffel G(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l)
          s += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        G(k, i, j) = s;
      }
  return G;
}

/// Second fundamental form from finite differences of the map and the
/// target metric: h_ij = P_N (d_i d_j phi + Gamma(d_i phi, d_j phi)), with
/// P_N built from the normal equations of the g_M-weighted projection.
struct FdSecondFundamentalForm {
  std::vector<Eigen::VectorXd> h;  // row-major n x n
  Eigen::MatrixXd gM;
  Eigen::MatrixXd gN;
  std::size_t n = 0;
  const Eigen::VectorXd& at(std::size_t i, std::size_t j) const { return h[i * n + j]; }
  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return a.dot(gM * b); }
};

inline FdSecondFundamentalForm fd_second_fundamental_form(const ImmersionSetup& s,
                                                          const std::vector<double>& x,
                                                          double h = 1e-4) {
  const std::size_t n = s.map.source().dimension();
  const std::size_t m = s.map.target().dimension();
  auto phi = [&](const std::vector<double>& p) { return s.map.value(p); };
  Eigen::MatrixXd J(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p = x, q = x;
    p[i] += h;
    q[i] -= h;
    J.col(static_cast<Eigen::Index>(i)) = (phi(p) - phi(q)) / (2 * h);
  }
  const Eigen::VectorXd y = phi(x);
  const std::vector<double> yv(y.data(), y.data() + y.size());
  FdSecondFundamentalForm out;
  out.n = n;
  out.gM = s.gM.evaluate(yv);
  out.gN = s.gN.evaluate(x);
  const Christoffel G = fd_christoffel(s.gM, yv);
  const Eigen::MatrixXd PT = J * (J.transpose() * out.gM * J).inverse() * J.transpose() * out.gM;
  const Eigen::MatrixXd PN = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m),
                                                       static_cast<Eigen::Index>(m)) - PT;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      auto shifted = [&](double di, double dj) {
        std::vector<double> p = x;
        p[i] += di;
        p[j] += dj;
        return phi(p);
      };
      const Eigen::VectorXd d2 =
          (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4 * h * h);
      Eigen::VectorXd amb = d2;
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t b = 0; b < m; ++b)
            amb[static_cast<Eigen::Index>(k)] += G(k, a, b) * J(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) *
                                                 J(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
      out.h.push_back(PN * amb);
    }
  }
  return out;
}

/// |h|^2 summed over a g_N-orthonormal frame (Cholesky based), restricted to
/// coordinate indices [lo, hi) when the metric is block diagonal.
inline double fd_norm2(const FdSecondFundamentalForm& f, std::size_t lo, std::size_t hi) {
  const Eigen::MatrixXd L = f.gN.llt().matrixL();
  const Eigen::MatrixXd E = L.transpose().inverse();  // columns orthonormal for gN
  double s = 0.0;
  for (std::size_t a = lo; a < hi; ++a)
    for (std::size_t b = lo; b < hi; ++b) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(f.h.front().size());
      for (std::size_t i = 0; i < f.n; ++i)
        for (std::size_t j = 0; j < f.n; ++j)
          v += E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) *
               E(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) * f.at(i, j);
      s += f.inner(v, v);
    }
  return s;
}

/// Seeded random expression over x0..x{n-1}, built so that it stays inside
/// every function's domain on [-1, 1]^n.
class RandomExpression {
 public:
  explicit RandomExpression(std::uint64_t seed) : rng_(seed) {}

  std::string operator()(std::size_t n, int depth = 3) { return node(n, depth); }

  std::vector<std::string> variables(std::size_t n) const {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back("x" + std::to_string(i));
    return v;
  }

  std::vector<double> point(std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(n);
    for (auto& c : x) c = u(rng_);
    return x;
  }

 private:
  std::string number() {
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", u(rng_));
    return std::string("(") + buf + ")";
  }

  std::string node(std::size_t n, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 12);
    std::uniform_int_distribution<std::size_t> var(0, n - 1);
    switch (pick(rng_)) {
      case 0: return "x" + std::to_string(var(rng_));
      case 1: return number() + "*x" + std::to_string(var(rng_));
      case 2: return "(" + node(n, depth - 1) + " + " + node(n, depth - 1) + ")";
      case 3: return "(" + node(n, depth - 1) + " - " + node(n, depth - 1) + ")";
      case 4: return "(" + node(n, depth - 1) + " * " + node(n, depth - 1) + ")";
      case 5: return "(" + node(n, depth - 1) + " / (2 + sin(" + node(n, depth - 1) + ")))";
      case 6: return "sin(" + node(n, depth - 1) + ")";
      case 7: return "cos(" + node(n, depth - 1) + ")";
      case 8: return "exp(0.5*tanh(" + node(n, depth - 1) + "))";
      case 9: return "ln(2 + cos(" + node(n, depth - 1) + "))";
      case 10: return "sqrt(1 + (" + node(n, depth - 1) + ")^2)";
      case 11: return "(" + node(n, depth - 1) + ")^3";
      default: return "pow(1.5 + sin(" + node(n, depth - 1) + "), " + node(n, depth - 1) + ")";
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace twistprod::testing
