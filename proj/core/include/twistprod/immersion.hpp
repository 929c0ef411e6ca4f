#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twistprod/geometry.hpp"

namespace twistprod {

/// Smallest singular value a Jacobian may have before the map is treated
/// as rank deficient.
inline constexpr double kRankTolerance = 1e-8;

/// Accepted isometry defect |J^T g_M J - g_N|.
inline constexpr double kIsometryTolerance = 1e-8;

/// phi: source chart (dim n) -> target chart (dim m >= n), one expression
/// per target coordinate over the source coordinates.
class SmoothMap {
 public:
  SmoothMap() = default;
  SmoothMap(ChartDomain source, ChartDomain target, std::vector<Expression> components);
  static SmoothMap parse(ChartDomain source, ChartDomain target,
                         const std::vector<std::string>& sources);
  static SmoothMap identity(const ChartDomain& chart);

  const ChartDomain& source() const { return source_; }
  const ChartDomain& target() const { return target_; }
  const std::vector<Expression>& components() const { return components_; }

  Vector value(std::span<const double> x) const;
  /// m x n matrix of first partials.
  Matrix jacobian(std::span<const double> x) const;

  struct Local {
    Vector y;                    // phi(x)
    Matrix J;                    // m x n
    std::vector<Matrix> second;  // second[a](i, j) = d_i d_j phi^a
  };
  Local local(std::span<const double> x) const;

 private:
  ChartDomain source_;
  ChartDomain target_;
  std::vector<Expression> components_;
};

/// Source coordinates split as n1 + n2 (n2 = 0 for a plain immersion).
struct BlockSplit {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t total() const { return n1 + n2; }
};

struct ImmersionSetup {
  std::string name;
  MetricField gN;
  MetricField gM;
  SmoothMap map;
  BlockSplit split;
  /// Block split of the target coordinates, when the target is a product.
  std::optional<BlockSplit> target_split;

  /// Throws Error(kDimension) when charts, metrics, map and splits disagree.
  void validate() const;
};

/// Everything pointwise about an immersion at one source point.
struct ImmersionPoint {
  Vector x;
  SmoothMap::Local local;
  MetricSample source;  // g_N at x
  MetricSample target;  // g_M at phi(x)
  Matrix P_T;           // g_M-orthogonal projector onto span J
  Matrix P_N;           // I - P_T
  Matrix frame;         // g_N-orthonormal frame (columns), coordinate order
  /// ambient[i * n + j] = d_i d_j phi + Gamma_M(J_i, J_j), the ambient
  /// derivative of phi_* d_j along phi_* d_i.
  std::vector<Vector> ambient;
  /// h[i * n + j] = P_N ambient[i * n + j].
  std::vector<Vector> h;

  std::size_t n() const { return static_cast<std::size_t>(local.J.cols()); }
  std::size_t m() const { return static_cast<std::size_t>(local.J.rows()); }
  const Vector& h_coord(std::size_t i, std::size_t j) const { return h[i * n() + j]; }
  /// h(X, Y) for source vectors X, Y (bilinear extension of h_coord).
  Vector h_of(const Vector& X, const Vector& Y) const;
  /// g_M inner product at phi(x).
  double inner(const Vector& a, const Vector& b) const { return a.dot(target.g * b); }
  double norm2(const Vector& a) const { return inner(a, a); }
};

/// Throws Error(kRankDeficient) if the Jacobian has a singular value below
/// kRankTolerance.
ImmersionPoint evaluate_immersion(const ImmersionSetup& setup, std::span<const double> x);

TangentVector pushforward(const ImmersionSetup& setup, const TangentVector& v);

/// max |J^T g_M(phi(x)) J - g_N(x)| over seeded samples.
double isometry_residual(const ImmersionSetup& setup, std::size_t samples, std::uint64_t seed);
double isometry_residual_at(const ImmersionPoint& p);
/// Throws Error(kNotIsometric) if isometry_residual exceeds
/// kIsometryTolerance.
void require_isometric(const ImmersionSetup& setup, std::size_t samples, std::uint64_t seed);

/// (P_T, P_N) at phi(x).
std::pair<Matrix, Matrix> tangent_normal_projectors(const ImmersionSetup& setup,
                                                    std::span<const double> x);

struct NormalVector {
  Vector base;
  Vector components;
};

NormalVector second_fundamental_form(const ImmersionSetup& setup, const VectorField& X,
                                     const VectorField& Y, std::span<const double> x);

/// max over coordinate pairs of |P_T ambient_ij - phi_*(nabla_{d_i} d_j)|, the
/// tangential half of the Gauss formula.
double gauss_formula_residual(const ImmersionPoint& p);

/// A_eta X with g_N(A_eta X, Y) = g_M(h(X, Y), eta), in source components.
TangentVector shape_operator(const ImmersionSetup& setup, const NormalVector& eta,
                             const TangentVector& X);

struct MeanCurvature {
  Vector H;
  double norm2 = 0.0;
};
MeanCurvature mean_curvature(const ImmersionSetup& setup, std::span<const double> x);
MeanCurvature mean_curvature(const ImmersionPoint& p);

struct PartialTraces {
  Vector trace1, trace2;
  Vector H1, H2;
};
/// Traces of h over the first n1 and last n2 frame vectors. Throws
/// Error(kDegenerateSplit) if either block is empty.
PartialTraces partial_traces(const ImmersionSetup& setup, std::span<const double> x);
PartialTraces partial_traces(const ImmersionPoint& p, const BlockSplit& split);

struct NormalGradient {
  Vector Df, D1f, D2f;
  double residual = 0.0;  // |Df - D1f - D2f|_{g_M}
};
/// f is a scalar field on the target chart. D_i f projects the gradient of
/// f restricted to target block i. Throws Error(kMissingTargetSplit) without
/// a target split.
NormalGradient normal_gradient_split(const ImmersionSetup& setup, const ScalarField& f,
                                     std::span<const double> x);
NormalGradient normal_gradient_split(const ImmersionPoint& p, const BlockSplit& target_split,
                                     const Jet2& f);

/// max |h(d_i, d_alpha)|_{g_M} over i < n1 <= alpha and seeded samples.
double mixed_totally_geodesic_residual(const ImmersionSetup& setup, std::size_t samples,
                                       std::uint64_t seed);
double mixed_totally_geodesic_residual_at(const ImmersionPoint& p, const BlockSplit& split);

struct Umbilicity {
  double residual = 0.0;
  double lambda = 0.0;
  /// False when H = 0 but h != 0, so no lambda fits.
  bool lambda_defined = true;
};
/// max over frame pairs of |h(e_i, e_j) - lambda delta_ij H| with lambda
/// fitted by least squares over the diagonal.
Umbilicity umbilicity_residual(const ImmersionSetup& setup, std::span<const double> x);

}  // namespace twistprod
