#include "nh/material.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

#include "nh/errors.hpp"

namespace nh {

void MaterialModel::validate() const {
  if (!(r_exp > 1.0))
    throw std::invalid_argument(
        "r_exp must satisfy r > 1 (r = 1 is unsupported: the regularization "
        "term |dev T|^(2r-2) dev T loses smoothness at 0)");
  if (!(trunc_k > 0.0))
    throw std::invalid_argument("trunc_k must be positive (may be +inf)");
  if (f_spec.kind == FSpec::Kind::PowerLaw || f_spec.kind == FSpec::Kind::Custom) {
    if (f_spec.a < 0.0 || f_spec.B < 0.0)
      throw std::invalid_argument("f growth parameters require a >= 0 and B >= 0");
    if (!(f_spec.alpha > 0.5) || !(f_spec.alpha < 5.0 / 6.0))
      throw std::invalid_argument("f exponent alpha must lie in (1/2, 5/6)");
    if (!(f_spec.B_tilde > 0.0))
      throw std::invalid_argument("f negative-branch constant B_tilde must be > 0");
  }
  if (!(beta_spec.d > 0.0) || !(beta_spec.d_tilde > 0.0))
    throw std::invalid_argument("beta parameters require d > 0 and d_tilde > 0");
  if (f_spec.kind == FSpec::Kind::Custom && !f_spec.custom)
    throw std::invalid_argument("custom f selected but no function attached");
  if (beta_spec.kind == BetaSpec::Kind::Custom && !beta_spec.custom)
    throw std::invalid_argument("custom beta selected but no function attached");
  if (!(newton_tol > 0.0) || max_iter < 1)
    throw std::invalid_argument("newton_tol must be > 0 and max_iter >= 1");
}

double f_eval(const MaterialModel& model, double theta) {
  const FSpec& f = model.f_spec;
  switch (f.kind) {
    case FSpec::Kind::Zero:
      return 0.0;
    case FSpec::Kind::Custom:
      return f.custom(theta);
    case FSpec::Kind::PowerLaw:
      break;
  }
  if (theta >= 0.0) return f.B * (std::pow(1.0 + theta, f.alpha) - 1.0);
  return -f.B_tilde * (std::sqrt(1.0 - theta) - 1.0);
}

double f_derivative(const MaterialModel& model, double theta) {
  const FSpec& f = model.f_spec;
  switch (f.kind) {
    case FSpec::Kind::Zero:
      return 0.0;
    case FSpec::Kind::Custom: {
      const double h = 1e-6 * (1.0 + std::abs(theta));
      return (f.custom(theta + h) - f.custom(theta - h)) / (2.0 * h);
    }
    case FSpec::Kind::PowerLaw:
      break;
  }
  if (theta >= 0.0) return f.B * f.alpha * std::pow(1.0 + theta, f.alpha - 1.0);
  return 0.5 * f.B_tilde / std::sqrt(1.0 - theta);
}

namespace {

// C^1 clamp of the identity onto [0, 1] with parabolic corner rounding.
constexpr double kRampCorner = 0.1;

double ramp01(double x) {
  const double r = kRampCorner;
  if (x <= -r) return 0.0;
  if (x < r) return (x + r) * (x + r) / (4.0 * r);
  if (x <= 1.0 - r) return x;
  if (x < 1.0 + r) {
    const double y = 1.0 - x + r;
    return 1.0 - y * y / (4.0 * r);
  }
  return 1.0;
}

double ramp01_derivative(double x) {
  const double r = kRampCorner;
  if (x <= -r) return 0.0;
  if (x < r) return (x + r) / (2.0 * r);
  if (x <= 1.0 - r) return 1.0;
  if (x < 1.0 + r) return (1.0 - x + r) / (2.0 * r);
  return 0.0;
}

} // namespace

BetaValue beta_eval(const MaterialModel& model, double theta) {
  const BetaSpec& b = model.beta_spec;
  switch (b.kind) {
    case BetaSpec::Kind::Constant:
      return {b.d, 0.0};
    case BetaSpec::Kind::SmoothClampedLinear: {
      const double x = (b.d - theta) / b.d;
      return {b.d * ramp01(x), -ramp01_derivative(x)};
    }
    case BetaSpec::Kind::Custom: {
      const double h = 1e-6 * (1.0 + std::abs(theta));
      const double v = b.custom(theta);
      const double dv = (b.custom(theta + h) - b.custom(theta - h)) / (2.0 * h);
      return {v, dv};
    }
  }
  return {b.d, 0.0};
}

SymTensor3 flow_rate(const MaterialModel& model, const SymTensor3& t, double theta) {
  const SymTensor3 dev = t.deviator();
  const double rho = dev.norm();
  if (rho == 0.0) return SymTensor3::zero();
  const double excess = rho - beta_eval(model, theta).value;
  if (excess <= 0.0) return SymTensor3::zero();
  return dev * (std::pow(excess, model.r_exp) / rho);
}

SymTensor3 regularization_rate(const MaterialModel& model, const SymTensor3& t) {
  if (!model.truncated()) return SymTensor3::zero();
  const SymTensor3 dev = t.deviator();
  const double rho = dev.norm();
  if (rho == 0.0) return SymTensor3::zero();
  return dev * (std::pow(rho, 2.0 * model.r_exp - 2.0) / model.trunc_k);
}

double dissipation_density(const MaterialModel& model, const SymTensor3& t,
                           double theta, bool include_regularization) {
  const double rho = t.deviator().norm();
  const double excess = std::max(rho - beta_eval(model, theta).value, 0.0);
  double d = std::pow(excess, model.r_exp) * rho;
  if (include_regularization && model.truncated())
    d += std::pow(rho, 2.0 * model.r_exp) / model.trunc_k;
  return d;
}

namespace {

// Combined inelastic rate in Mandel form: (phi_f(rho) + phi_g(rho)) s/rho
// with s = dev T, phi_f = {rho - beta}_+^r, phi_g = rho^(2r-1)/k.
Vec6 inelastic_rate_mandel(const MaterialModel& model, const Vec6& t_m,
                           double beta) {
  static const Mat6 P = mandel_dev_projector();
  const Vec6 s = P * t_m;
  const double rho = s.norm();
  if (rho == 0.0) return Vec6::Zero();
  double phi = 0.0;
  const double excess = rho - beta;
  if (excess > 0.0) phi += std::pow(excess, model.r_exp);
  if (model.truncated()) phi += std::pow(rho, 2.0 * model.r_exp - 1.0) / model.trunc_k;
  return s * (phi / rho);
}

Mat6 inelastic_jacobian_mandel_impl(const MaterialModel& model, const Vec6& t_m,
                                    double beta) {
  static const Mat6 P = mandel_dev_projector();
  const Vec6 s = P * t_m;
  const double rho = s.norm();
  if (rho == 0.0) return Mat6::Zero();

  double phi = 0.0, dphi = 0.0;
  const double excess = rho - beta;
  if (excess > 0.0) {
    phi += std::pow(excess, model.r_exp);
    dphi += model.r_exp * std::pow(excess, model.r_exp - 1.0);
  }
  if (model.truncated()) {
    const double p = 2.0 * model.r_exp - 1.0;
    phi += std::pow(rho, p) / model.trunc_k;
    dphi += p * std::pow(rho, p - 1.0) / model.trunc_k;
  }

  const Vec6 n = s / rho;
  // Radial/tangential split of d/dT [phi(rho) s/rho].
  return dphi * (n * n.transpose()) + (phi / rho) * (P - n * n.transpose());
}

} // namespace

Mat6 inelastic_jacobian_mandel(const MaterialModel& model, const SymTensor3& t,
                               double theta) {
  return inelastic_jacobian_mandel_impl(model, t.mandel(),
                                        beta_eval(model, theta).value);
}

PointStepResult material_point_step_full(const MaterialModel& model,
                                         const MaterialPointState& state,
                                         const SymTensor3& strain_rate,
                                         double theta_next, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("material_point_step: dt must be > 0");

  const Mat6 cinv = hooke_inverse_mandel(model.moduli);
  const Mat6 chooke = hooke_mandel(model.moduli);
  const Vec6 t_now = state.stress.mandel();
  const Vec6 eps_rate = strain_rate.mandel();
  const double beta = beta_eval(model, theta_next).value;

  auto residual = [&](const Vec6& t) -> Vec6 {
    return cinv * (t - t_now) / dt + inelastic_rate_mandel(model, t, beta) - eps_rate;
  };

  const double tol = model.newton_tol * (1.0 + eps_rate.norm());

  // Elastic predictor.
  Vec6 t = t_now + dt * (chooke * eps_rate);
  Vec6 r = residual(t);
  double rnorm = r.norm();

  int it = 0;
  for (; it < model.max_iter && rnorm > tol; ++it) {
    const Mat6 jac = cinv / dt + inelastic_jacobian_mandel_impl(model, t, beta);
    const Vec6 step = jac.ldlt().solve(-r);

    double scale = 1.0;
    Vec6 t_new;
    Vec6 r_new;
    double rnorm_new = 0.0;
    for (int halving = 0; halving <= 30; ++halving) {
      t_new = t + scale * step;
      r_new = residual(t_new);
      rnorm_new = r_new.norm();
      if (rnorm_new < rnorm || rnorm_new <= tol) break;
      scale *= 0.5;
    }
    if (rnorm_new >= rnorm && rnorm_new > tol) {
      std::ostringstream os;
      os << "material_point_step: damped Newton stalled at residual " << rnorm
         << " (tol " << tol << ")";
      throw NonConvergence(os.str());
    }
    t = t_new;
    r = r_new;
    rnorm = rnorm_new;
  }
  if (rnorm > tol) {
    std::ostringstream os;
    os << "material_point_step: no convergence after " << model.max_iter
       << " iterations, residual " << rnorm << " (tol " << tol << ")";
    throw NonConvergence(os.str());
  }

  PointStepResult out;
  out.stress = SymTensor3::from_mandel(t);
  out.iterations = it;
  const Mat6 jac = cinv / dt + inelastic_jacobian_mandel_impl(model, t, beta);
  out.tangent = jac.ldlt().solve(Mat6::Identity()) / dt;
  return out;
}

MaterialReport validate_material(const MaterialModel& model, int sample_count) {
  if (sample_count < 100)
    throw std::invalid_argument("validate_material: sample_count must be >= 100");

  // Log-spaced magnitudes plus zero, both signs.
  std::vector<double> grid;
  grid.push_back(0.0);
  const double lo = -3.0, hi = 6.0;
  for (int i = 0; i < sample_count; ++i) {
    const double mag = std::pow(10.0, lo + (hi - lo) * i / (sample_count - 1.0));
    grid.push_back(mag);
    grid.push_back(-mag);
  }

  MaterialReport report;
  const FSpec& f = model.f_spec;
  const BetaSpec& b = model.beta_spec;

  MaterialCheck pos{"f growth (theta >= 0): |f| <= a + B|theta|^alpha", true, 0.0};
  MaterialCheck neg{"f growth (theta < 0): |f| <= B_tilde (1+|theta|)^(1/2)", true, 0.0};
  MaterialCheck brange{"beta range: beta in [0, d]", true, 0.0};
  MaterialCheck bslope{"beta slope: |beta'| <= d_tilde (finite differences)", true, 0.0};

  const double tol = 1e-6;
  for (double theta : grid) {
    const double fv = std::abs(f_eval(model, theta));
    if (theta >= 0.0) {
      const double bound = f.a + f.B * std::pow(std::abs(theta), f.alpha);
      const double ratio = fv == 0.0 ? 0.0 : fv / std::max(bound, 1e-300);
      pos.worst_ratio = std::max(pos.worst_ratio, ratio);
    } else {
      const double bound = f.B_tilde * std::sqrt(1.0 + std::abs(theta));
      const double ratio = fv == 0.0 ? 0.0 : fv / std::max(bound, 1e-300);
      neg.worst_ratio = std::max(neg.worst_ratio, ratio);
    }

    const double bv = beta_eval(model, theta).value;
    brange.worst_ratio = std::max(brange.worst_ratio,
                                  std::max(bv / b.d, -bv / (tol * b.d + 1e-300)));
    if (bv < -tol * b.d || bv > b.d * (1.0 + tol)) brange.pass = false;

    const double h = 1e-5 * (1.0 + std::abs(theta));
    const double fd = (beta_eval(model, theta + h).value -
                       beta_eval(model, theta - h).value) / (2.0 * h);
    bslope.worst_ratio = std::max(bslope.worst_ratio, std::abs(fd) / b.d_tilde);
  }

  pos.pass = pos.worst_ratio <= 1.0 + tol;
  neg.pass = neg.worst_ratio <= 1.0 + tol;
  bslope.pass = bslope.worst_ratio <= 1.0 + tol;

  report.checks = {pos, neg, brange, bslope};
  report.all_pass = pos.pass && neg.pass && brange.pass && bslope.pass;
  return report;
}

} // namespace nh
