#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "nh/tensor.hpp"

namespace nh {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thermal-stress function f(theta).
///
/// The built-in power law is
///   f(theta) = B ((1+theta)^alpha - 1)          for theta >= 0,
///   f(theta) = -Bt ((1+|theta|)^(1/2) - 1)      for theta < 0,
/// which satisfies |f| <= a + B|theta|^alpha on the right and
/// |f| <= Bt (1+|theta|)^(1/2) on the left. Custom forms go through
/// validate_material before use.
struct FSpec {
  enum class Kind { PowerLaw, Zero, Custom };
  Kind kind = Kind::PowerLaw;
  double a = 0.0;
  double B = 1.0;
  double B_tilde = 1.0;
  double alpha = 0.7;
  std::function<double(double)> custom;
  std::string custom_source; // expression text for round-trips
};

/// Yield radius beta(theta), valued in [0, d] with |beta'| <= d_tilde.
/// SmoothClampedLinear is a C^1 clamp of d - theta onto [0, d]: it equals
/// d - theta away from the corners and saturates outside, with corner
/// rounding over a fixed fraction of the band.
struct BetaSpec {
  enum class Kind { Constant, SmoothClampedLinear, Custom };
  Kind kind = Kind::Constant;
  double d = 1.0;
  double d_tilde = 1.0;
  std::function<double(double)> custom;
  std::string custom_source;
};

struct MaterialModel {
  ElasticModuli moduli{1.0, 1.0};
  double r_exp = 2.0;
  double trunc_k = kInf; // +inf runs the untruncated system
  FSpec f_spec;
  BetaSpec beta_spec;
  double newton_tol = 1e-10;
  int max_iter = 50;

  bool truncated() const { return std::isfinite(trunc_k); }

  /// Throws std::invalid_argument on any violated parameter constraint.
  void validate() const;
};

struct MaterialPointState {
  SymTensor3 stress;
  double temperature = 0.0;
  double time = 0.0;
};

/// Clamp of x to [-level, level]; level may be +inf.
inline double truncate(double level, double x) {
  return std::min(level, std::max(x, -level));
}

/// Antiderivative of the clamp: x^2/2 inside the band, linear growth outside.
inline double truncation_primitive(double level, double x) {
  const double ax = std::abs(x);
  if (ax <= level) return 0.5 * x * x;
  return 0.5 * level * level + level * (ax - level);
}

double f_eval(const MaterialModel& model, double theta);

/// One-sided derivative of f (positive branch at the origin kink).
double f_derivative(const MaterialModel& model, double theta);

struct BetaValue {
  double value;
  double derivative;
};

BetaValue beta_eval(const MaterialModel& model, double theta);

inline double yield_excess(const MaterialModel& model, const SymTensor3& t,
                           double theta) {
  return std::max(t.deviator().norm() - beta_eval(model, theta).value, 0.0);
}

/// Power-law flow direction: {|dev T| - beta}_+^r dev T / |dev T|,
/// zero at dev T = 0 (the prefactor vanishes there since beta >= 0).
SymTensor3 flow_rate(const MaterialModel& model, const SymTensor3& t, double theta);

/// (1/k) |dev T|^(2r-2) dev T; smooth at dev T = 0 for r > 1.
SymTensor3 regularization_rate(const MaterialModel& model, const SymTensor3& t);

double dissipation_density(const MaterialModel& model, const SymTensor3& t,
                           double theta, bool include_regularization);

/// Mandel Jacobian of flow_rate + regularization_rate with respect to T.
/// Symmetric positive semidefinite; one-sided from the plastic side at the
/// yield kink.
Mat6 inelastic_jacobian_mandel(const MaterialModel& model, const SymTensor3& t,
                               double theta);

struct PointStepResult {
  SymTensor3 stress;
  Mat6 tangent;     // dT_next / d(strain at t+dt), Mandel form
  int iterations = 0;
};

/// Backward-Euler update of the local flow rule: solves
///   C^-1 (T_next - T_now)/dt + flow(T_next) + reg(T_next) = strain_rate
/// by damped Newton on the six stress components. Also returns the
/// consistent tangent for the condensed global solve.
PointStepResult material_point_step_full(const MaterialModel& model,
                                         const MaterialPointState& state,
                                         const SymTensor3& strain_rate,
                                         double theta_next, double dt);

inline SymTensor3 material_point_step(const MaterialModel& model,
                                      const MaterialPointState& state,
                                      const SymTensor3& strain_rate,
                                      double theta_next, double dt) {
  return material_point_step_full(model, state, strain_rate, theta_next, dt).stress;
}

struct MaterialCheck {
  std::string name;
  bool pass = false;
  double worst_ratio = 0.0; // worst |quantity| / bound over the sample grid
};

struct MaterialReport {
  std::vector<MaterialCheck> checks;
  bool all_pass = false;
};

/// Samples f and beta on a log-spaced grid and checks the admissibility
/// bounds numerically: growth of f on both branches, beta in [0, d] and
/// finite-difference |beta'| <= d_tilde.
MaterialReport validate_material(const MaterialModel& model, int sample_count);

} // namespace nh
