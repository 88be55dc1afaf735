#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "magray/scalar_field.hpp"

namespace magray {

using Mat = std::array<Vec, kMaxDim>;
using Tensor3 = std::array<Mat, kMaxDim>;

struct Tolerances {
  double step = 1e-3;             ///< integrator step h
  double boundary_tol = 1e-12;    ///< |ρ| accepted at an exit point
  double glancing_eps = 1e-3;     ///< |g(v,ν)| below this counts as glancing
  double speed_drift_tol = 1e-8;  ///< | |v|_g - 1 | before renormalization
  double precondition_tol = 1e-9; ///< slack when checking caller-supplied points
  double trap_budget = 1e3;       ///< maximal arclength, in units of the radius
  double chart_margin = 0.1;      ///< formulas are trusted up to |x| <= (1+margin)R
};

enum class MetricFamily { euclidean, conformal };

/// Raw description of a magnetic system on the closed ball of radius R:
/// g = e^{2λ}δ (λ = 0 for the euclidean family) and a polynomial 1-form ω.
struct ScenarioSpec {
  std::string name;
  int n = 2;
  MetricFamily family = MetricFamily::euclidean;
  Polynomial lambda;
  std::vector<Polynomial> omega;
  double radius = 1.0;
  Tolerances tolerances;
};

/// Immutable magnetic system (M, g, ω). Holds the symbolic fields every
/// tensor operation shares: metric, inverse metric, Christoffel symbols and
/// the Lorentz map, all as exact members of R[x][e^{±λ}].
///
/// Construct through make_scenario() to get the positivity and strict
/// convexity validation; the constructor itself does not validate.
class Scenario {
 public:
  explicit Scenario(ScenarioSpec spec) : spec_(std::move(spec)) {
    const int n = spec_.n;
    if (n < 2 || n > kMaxDim) throw CapacityError("scenario dimension must lie in [2, kMaxDim]");
    if (!(spec_.radius > 0.0)) throw ScenarioError("radius must be positive");
    if (spec_.lambda.dim() == 0) spec_.lambda = Polynomial(n);
    if (spec_.family == MetricFamily::euclidean && !spec_.lambda.is_zero())
      throw ScenarioError("euclidean family takes no conformal exponent");
    spec_.omega.resize(static_cast<std::size_t>(n), Polynomial(n));
    for (auto& w : spec_.omega)
      if (w.dim() == 0) w = Polynomial(n);
    for (const auto& w : spec_.omega)
      if (w.dim() != n) throw ScenarioError("omega coefficient dimension mismatch");
    if (spec_.lambda.dim() != n) throw ScenarioError("lambda dimension mismatch");

    if (!spec_.lambda.is_zero()) cf_ = std::make_shared<ConformalFactor>(n, spec_.lambda);
    lambda_grad_.fill(Polynomial(n));
    if (cf_)
      for (int k = 0; k < n; ++k) lambda_grad_[k] = cf_->grad[k];

    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) domega_partial_[k][j] = spec_.omega[j].derivative(k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) domega_[i][j] = domega_partial_[i][j] - domega_partial_[j][i];

    degree_bound_ = spec_.lambda.degree();
    for (const auto& w : spec_.omega) degree_bound_ = std::max(degree_bound_, w.degree());
    build_symbolic();
  }

  const ScenarioSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  int dim() const { return spec_.n; }
  double radius() const { return spec_.radius; }
  MetricFamily family() const { return spec_.family; }
  const Tolerances& tol() const { return spec_.tolerances; }
  const ConformalFactorPtr& conformal_factor() const { return cf_; }
  const Polynomial& lambda() const { return spec_.lambda; }
  const Polynomial& lambda_grad(int k) const { return lambda_grad_[k]; }
  const Polynomial& omega(int i) const { return spec_.omega[i]; }
  /// ∂_k ω_j
  const Polynomial& omega_partial(int k, int j) const { return domega_partial_[k][j]; }
  /// (dω)_{ij} = ∂_i ω_j - ∂_j ω_i
  const Polynomial& domega(int i, int j) const { return domega_[i][j]; }

  /// Largest polynomial degree among λ and ω_i.
  int degree_bound() const { return degree_bound_; }

  double chart_limit() const { return spec_.radius * (1.0 + spec_.tolerances.chart_margin); }

  /// Symbolic g_ij, g^ij, Γ^i_jk and F^i_j.
  const ScalarField& metric_field(int i, int j) const { return g_[i][j]; }
  const ScalarField& inverse_metric_field(int i, int j) const { return ginv_[i][j]; }
  const ScalarField& christoffel_field(int i, int j, int k) const { return gamma_[i][j][k]; }
  const ScalarField& lorentz_field(int i, int j) const { return lorentz_[i][j]; }
  const ScalarField& omega_field(int i) const { return omega_f_[i]; }

  /// R² - |x|², the generator of boundary-vanishing fields.
  ScalarField boundary_factor() const {
    const int n = dim();
    Polynomial p = Polynomial::constant(n, spec_.radius * spec_.radius);
    for (int i = 0; i < n; ++i) {
      Exponent e{};
      e[i] = 2;
      p -= Polynomial::monomial(n, e, 1.0);
    }
    return ScalarField::from_polynomial(cf_, p);
  }

  ScalarField constant_field(double c) const { return ScalarField::constant(dim(), cf_, c); }

  /// Field strength b when this is the flat disk with ω = (b/2)(x¹dx² - x²dx¹)
  /// (b = 0 for ω = 0); empty otherwise.
  std::optional<double> uniform_field() const {
    if (spec_.n != 2 || spec_.family != MetricFamily::euclidean) return std::nullopt;
    const double b = 2.0 * spec_.omega[1].coefficient(Exponent{1, 0, 0, 0});
    const Polynomial w0 = Polynomial::variable(2, 1, -0.5 * b);
    const Polynomial w1 = Polynomial::variable(2, 0, 0.5 * b);
    if (spec_.omega[0] == w0 && spec_.omega[1] == w1) return b;
    return std::nullopt;
  }

 private:
  void build_symbolic() {
    const int n = dim();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        g_[i][j] = ScalarField(n, cf_);
        ginv_[i][j] = ScalarField(n, cf_);
      }
    for (int i = 0; i < n; ++i) {
      g_[i][i] = ScalarField::constant(n, cf_, 1.0, 2);
      ginv_[i][i] = ScalarField::constant(n, cf_, 1.0, -2);
    }
    // Conformal Christoffels: Γ^i_jk = δ^i_j ∂_kλ + δ^i_k ∂_jλ - δ_jk ∂_iλ.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Polynomial p(n);
          if (i == j) p += lambda_grad_[k];
          if (i == k) p += lambda_grad_[j];
          if (j == k) p -= lambda_grad_[i];
          gamma_[i][j][k] = ScalarField::from_polynomial(cf_, p);
        }
    // F^i_j = -g^{ik}(dω)_{kj}
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lorentz_[i][j] = ScalarField::from_polynomial(cf_, -domega_[i][j], -2);
    for (int i = 0; i < n; ++i) omega_f_[i] = ScalarField::from_polynomial(cf_, spec_.omega[i]);
  }

  ScenarioSpec spec_;
  int degree_bound_ = 0;
  ConformalFactorPtr cf_;
  std::array<Polynomial, kMaxDim> lambda_grad_;
  std::array<std::array<Polynomial, kMaxDim>, kMaxDim> domega_partial_;
  std::array<std::array<Polynomial, kMaxDim>, kMaxDim> domega_;
  std::array<std::array<ScalarField, kMaxDim>, kMaxDim> g_, ginv_, lorentz_;
  std::array<std::array<std::array<ScalarField, kMaxDim>, kMaxDim>, kMaxDim> gamma_;
  std::array<ScalarField, kMaxDim> omega_f_;
};

using ScenarioPtr = std::shared_ptr<const Scenario>;

/// Flat disk of radius R with ω = (b/2)(x¹dx² - x²dx¹), i.e. dω = b dx¹∧dx².
inline ScenarioSpec uniform_field_spec(double b, double radius = 1.0, std::string name = {}) {
  ScenarioSpec s;
  s.name = name.empty() ? "uniform_field" : std::move(name);
  s.n = 2;
  s.radius = radius;
  s.lambda = Polynomial(2);
  s.omega = {Polynomial::variable(2, 1, -0.5 * b), Polynomial::variable(2, 0, 0.5 * b)};
  return s;
}

}  // namespace magray
