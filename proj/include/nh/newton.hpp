#pragma once

#include <functional>
#include <sstream>

#include "nh/errors.hpp"

namespace nh {

/// Damped Newton iteration on an arbitrary vector type with a norm().
///
/// `residual` evaluates r(x). `direction` is called at the current iterate
/// with its residual and must return the step solving J(x) d = -r;
/// implementations may cache assembly between the two calls. On residual
/// increase the step is halved (at most 30 times). Convergence means
/// ||r|| <= tol * (1 + ||r_0||).
template <class Vec>
Vec newton_solve(const std::function<Vec(const Vec&)>& residual,
                 const std::function<Vec(const Vec&, const Vec&)>& direction,
                 Vec x, double tol, int max_iter) {
  Vec r = residual(x);
  double rnorm = r.norm();
  const double target = tol * (1.0 + rnorm);

  for (int it = 0; it < max_iter && rnorm > target; ++it) {
    const Vec step = direction(x, r);
    double scale = 1.0;
    Vec x_new = x;
    Vec r_new = r;
    double rnorm_new = rnorm;
    bool accepted = false;
    for (int halving = 0; halving <= 30; ++halving) {
      x_new = x + scale * step;
      r_new = residual(x_new);
      rnorm_new = r_new.norm();
      if (rnorm_new < rnorm || rnorm_new <= target) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "newton_solve: damping stalled at residual " << rnorm << " (tol "
         << target << ")";
      throw NonConvergence(os.str());
    }
    x = x_new;
    r = r_new;
    rnorm = rnorm_new;
  }
  if (rnorm > target) {
    std::ostringstream os;
    os << "newton_solve: no convergence after " << max_iter
       << " iterations, residual " << rnorm << " (tol " << target << ")";
    throw NonConvergence(os.str());
  }
  return x;
}

} // namespace nh
