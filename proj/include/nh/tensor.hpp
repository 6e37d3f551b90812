#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace nh {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Symmetric 3x3 tensor stored as six independent components.
/// Off-diagonal entries are stored once; the Frobenius product doubles them.
struct SymTensor3 {
  double xx = 0.0, yy = 0.0, zz = 0.0;
  double xy = 0.0, yz = 0.0, xz = 0.0;

  static SymTensor3 zero() { return {}; }
  static SymTensor3 identity() { return {1.0, 1.0, 1.0, 0.0, 0.0, 0.0}; }
  static SymTensor3 diag(double a, double b, double c) {
    return {a, b, c, 0.0, 0.0, 0.0};
  }

  double trace() const { return xx + yy + zz; }

  SymTensor3 deviator() const {
    const double p = trace() / 3.0;
    SymTensor3 d{xx - p, yy - p, zz - p, xy, yz, xz};
    // Second pass removes the rounding drift of the first projection.
    const double q = d.trace() / 3.0;
    d.xx -= q;
    d.yy -= q;
    d.zz -= q;
    return d;
  }

  /// Frobenius double contraction A:B.
  double ddot(const SymTensor3& o) const {
    return xx * o.xx + yy * o.yy + zz * o.zz +
           2.0 * (xy * o.xy + yz * o.yz + xz * o.xz);
  }

  double norm() const { return std::sqrt(ddot(*this)); }

  SymTensor3 operator+(const SymTensor3& o) const {
    return {xx + o.xx, yy + o.yy, zz + o.zz, xy + o.xy, yz + o.yz, xz + o.xz};
  }
  SymTensor3 operator-(const SymTensor3& o) const {
    return {xx - o.xx, yy - o.yy, zz - o.zz, xy - o.xy, yz - o.yz, xz - o.xz};
  }
  SymTensor3 operator*(double s) const {
    return {xx * s, yy * s, zz * s, xy * s, yz * s, xz * s};
  }
  SymTensor3 operator-() const { return *this * -1.0; }
  SymTensor3& operator+=(const SymTensor3& o) { return *this = *this + o; }
  SymTensor3& operator-=(const SymTensor3& o) { return *this = *this - o; }

  bool finite() const {
    return std::isfinite(xx) && std::isfinite(yy) && std::isfinite(zz) &&
           std::isfinite(xy) && std::isfinite(yz) && std::isfinite(xz);
  }

  /// Mandel vector (sqrt(2)-scaled off-diagonals): the Euclidean dot of two
  /// Mandel vectors equals the Frobenius double contraction.
  Vec6 mandel() const {
    static const double s2 = std::sqrt(2.0);
    Vec6 m;
    m << xx, yy, zz, s2 * xy, s2 * yz, s2 * xz;
    return m;
  }

  static SymTensor3 from_mandel(const Vec6& m) {
    static const double is2 = 1.0 / std::sqrt(2.0);
    return {m[0], m[1], m[2], is2 * m[3], is2 * m[4], is2 * m[5]};
  }
};

inline SymTensor3 operator*(double s, const SymTensor3& a) { return a * s; }

inline double ddot(const SymTensor3& a, const SymTensor3& b) { return a.ddot(b); }

inline std::pair<SymTensor3, double> dev_vol_split(const SymTensor3& s) {
  return {s.deviator(), s.trace()};
}

/// Isotropic elasticity: C(E) = 2 mu E + lambda tr(E) Id.
/// Validity requires mu > 0 and 3 lambda + 2 mu > 0, which makes both C and
/// its inverse positive definite.
struct ElasticModuli {
  double mu;
  double lambda;

  ElasticModuli(double mu_, double lambda_) : mu(mu_), lambda(lambda_) {
    if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0))
      throw std::invalid_argument(
          "elastic moduli require mu > 0 and 3*lambda + 2*mu > 0");
  }

  double bulk3() const { return 2.0 * mu + 3.0 * lambda; }

  /// Smallest eigenvalue of C (coercivity constant): min(2mu, 2mu+3lambda).
  double coercivity() const { return std::min(2.0 * mu, bulk3()); }
};

inline SymTensor3 hooke_apply(const ElasticModuli& m, const SymTensor3& e) {
  const double lt = m.lambda * e.trace();
  const double two_mu = 2.0 * m.mu;
  return {two_mu * e.xx + lt, two_mu * e.yy + lt, two_mu * e.zz + lt,
          two_mu * e.xy, two_mu * e.yz, two_mu * e.xz};
}

inline SymTensor3 hooke_inverse_apply(const ElasticModuli& m, const SymTensor3& t) {
  const double a = 1.0 / (2.0 * m.mu);
  const double b = -m.lambda / (2.0 * m.mu * m.bulk3()) * t.trace();
  return {a * t.xx + b, a * t.yy + b, a * t.zz + b,
          a * t.xy, a * t.yz, a * t.xz};
}

/// (C A):B for inverse = false, (C^-1 A):B for inverse = true.
inline double energy_inner(const ElasticModuli& m, const SymTensor3& a,
                           const SymTensor3& b, bool inverse = false) {
  return inverse ? hooke_inverse_apply(m, a).ddot(b) : hooke_apply(m, a).ddot(b);
}

/// Mandel representation of the identity tensor (volumetric direction).
inline Vec6 mandel_id() {
  Vec6 v;
  v << 1.0, 1.0, 1.0, 0.0, 0.0, 0.0;
  return v;
}

/// Deviatoric projector in Mandel form: P = I - (1/3) id id^T.
inline Mat6 mandel_dev_projector() {
  const Vec6 id = mandel_id();
  return Mat6::Identity() - (id * id.transpose()) / 3.0;
}

/// C as a 6x6 Mandel matrix: 2 mu I + lambda id id^T.
inline Mat6 hooke_mandel(const ElasticModuli& m) {
  const Vec6 id = mandel_id();
  return 2.0 * m.mu * Mat6::Identity() + m.lambda * (id * id.transpose());
}

/// C^-1 as a 6x6 Mandel matrix.
inline Mat6 hooke_inverse_mandel(const ElasticModuli& m) {
  const Vec6 id = mandel_id();
  return Mat6::Identity() / (2.0 * m.mu) -
         m.lambda / (2.0 * m.mu * m.bulk3()) * (id * id.transpose());
}

} // namespace nh
