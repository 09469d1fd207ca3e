#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace dnamf {

inline double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double log_norm_pdf(double z) {
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
}

inline double log_norm_cdf(double z) {
  if (z > -35.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  // Asymptotic Mills-ratio series; erfc underflows further out.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return log_norm_pdf(z) - std::log(-z) + std::log(series);
}

// log(Phi(b) - Phi(a)) for a <= b; -inf when the interval is empty.
inline double log_norm_cdf_diff(double a, double b) {
  constexpr double ninf = -std::numeric_limits<double>::infinity();
  if (!(a < b)) return ninf;
  if (a >= 0.0) return log_norm_cdf_diff(-b, -a);
  if (b > 0.0) {
    // Both tails are small; 1 - Phi(a) - Phi(-b).
    const double tails = std::exp(log_norm_cdf(a)) + std::exp(log_norm_cdf(-b));
    return std::log1p(-tails);
  }
  const double la = log_norm_cdf(a), lb = log_norm_cdf(b);
  if (la == ninf) return lb;
  return lb + std::log1p(-std::exp(la - lb));
}

// Polynomial in one variable, ascending coefficients, degree <= 4.
using Poly = std::array<double, 5>;

inline Poly poly_mul(const Poly& p, const Poly& q) {
  Poly r{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; i + j < 5; ++j) r[i + j] += p[i] * q[j];
  return r;
}

inline double poly_eval(const Poly& p, double x) {
  double v = 0.0;
  for (int i = 4; i >= 0; --i) v = v * x + p[i];
  return v;
}

namespace detail {

// J_k = int_0^h s^k phi(alpha + s) ds for k = 0..4, returned as exp(log_scale) * j[k].
struct TailMoments {
  std::array<double, 5> j{};
  double log_scale = -std::numeric_limits<double>::infinity();
};

// 10-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 5> kGlNodes = {
    0.1488743389816312, 0.4333953941292472, 0.6794095682990244, 0.8650633666889845,
    0.9739065285171717};
inline constexpr std::array<double, 5> kGlWeights = {
    0.2955242247147529, 0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
    0.0666713443086881};

inline TailMoments tail_moments(double alpha, double h) {
  TailMoments out;
  if (!(h > 0.0)) return out;
  if (alpha <= 6.0) {
    // Forward recurrence; stable enough for alpha <= 6.
    const double l0 = log_norm_cdf_diff(alpha, alpha + h);
    if (l0 == -std::numeric_limits<double>::infinity()) return out;
    out.log_scale = l0;
    const double pa = std::exp(log_norm_pdf(alpha) - l0);
    const double ph = std::isfinite(h) ? std::exp(log_norm_pdf(alpha + h) - l0) : 0.0;
    auto& j = out.j;
    j[0] = 1.0;
    j[1] = pa - ph - alpha * j[0];
    for (int k = 2; k < 5; ++k) {
      const double hk = std::isfinite(h) ? std::pow(h, k - 1) * ph : 0.0;
      j[k] = (k - 1) * j[k - 2] - alpha * j[k - 1] - hk;
    }
    return out;
  }
  // Far tail: J_k = phi(alpha) int_0^h s^k exp(-alpha s - s^2/2) ds, by quadrature in u = alpha s.
  out.log_scale = log_norm_pdf(alpha);
  const double umax = std::min(alpha * h, 80.0);
  const int panels = 16;
  const double w = umax / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * w;
    for (int q = 0; q < 5; ++q)
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        const double u = mid + sgn * 0.5 * w * kGlNodes[static_cast<std::size_t>(q)];
        const double s = u / alpha;
        const double f = 0.5 * w * kGlWeights[static_cast<std::size_t>(q)] *
                         std::exp(-u - 0.5 * s * s) / alpha;
        double sk = 1.0;
        for (int k = 0; k < 5; ++k) {
          out.j[static_cast<std::size_t>(k)] += f * sk;
          sk *= s;
        }
      }
  }
  return out;
}

}  // namespace detail

// E[P(W) exp(s W) 1{0 < W < h}] for W ~ N(m, v); h may be +inf.
inline double expect_poly_exp(const Poly& P, double s, double m, double v, double h) {
  if (!(h > 0.0)) return 0.0;
  if (v <= 0.0) return (m > 0.0 && m < h) ? poly_eval(P, m) * std::exp(s * m) : 0.0;
  const double sd = std::sqrt(v);
  const double mt = m + s * v;  // tilted mean
  const double log_tilt = s * m + 0.5 * s * s * v;
  const auto tm = detail::tail_moments(-mt / sd, h / sd);
  if (tm.log_scale == -std::numeric_limits<double>::infinity()) return 0.0;
  // W = sd * S with S = X - alpha under the tilted law.
  double acc = 0.0, sk = 1.0;
  for (int k = 0; k < 5; ++k) {
    acc += P[static_cast<std::size_t>(k)] * sk * tm.j[static_cast<std::size_t>(k)];
    sk *= sd;
  }
  return std::exp(log_tilt + tm.log_scale) * acc;
}

}  // namespace dnamf
