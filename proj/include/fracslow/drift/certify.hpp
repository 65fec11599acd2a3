#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <boost/random/sobol.hpp>
#include <nlohmann/json.hpp>

#include "fracslow/core/error.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/drift/drift.hpp"

namespace fracslow::drift {

/// Which pairs must contract at rate kappa.
/// both_outside: |u| > R and |v| > R (the class S(kappa, R, lambda)).
/// one_outside:  |u| > R or |v| > R  (the enlarged-radius form).
enum class CertVariant { both_outside, one_outside };

inline std::string to_string(CertVariant v) { return v == CertVariant::both_outside ? "both-outside" : "one-outside"; }

struct Witness {
  Vector u;
  Vector v;
  /// Normalised margin (bound - <b(u)-b(v), u-v>) / |u-v|^2; negative means violated.
  double margin = 0.0;
};

struct ContractivityCertificate {
  double kappa = 0.0;
  double R = 0.0;
  double lambda = 0.0;
  std::size_t n_samples = 0;
  double worst_margin = 0.0;
  std::vector<Witness> violations;
  std::uint64_t seed = 0;
  std::string scheme;
  std::string drift_id;
  double box_radius = 0.0;
  CertVariant variant = CertVariant::both_outside;

  bool passed() const noexcept { return violations.empty(); }
};

namespace detail {

inline constexpr double kMarginTolerance = 1e-9;

// Sobol points in [0,1)^dim with a Cranley-Patterson rotation drawn from the seed.
class ShiftedSobol {
 public:
  ShiftedSobol(std::size_t dim, std::uint64_t seed) : engine_(static_cast<unsigned>(dim)), shift_(dim) {
    Rng rng(seed, label_of("sobol-shift"));
    for (auto& s : shift_) s = rng.uniform();
  }

  std::vector<double> next() {
    std::vector<double> p(shift_.size());
    const double span = static_cast<double>(engine_.max() - engine_.min()) + 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double raw = static_cast<double>(engine_() - engine_.min()) / span;
      p[i] = raw + shift_[i];
      if (p[i] >= 1.0) p[i] -= 1.0;
    }
    return p;
  }

 private:
  boost::random::sobol engine_;
  std::vector<double> shift_;
};

// Directions for the boundary grid: coordinate axes and sign diagonals.
inline std::vector<Vector> boundary_directions(std::size_t n) {
  std::vector<Vector> dirs;
  for (std::size_t i = 0; i < n; ++i)
    for (double s : {1.0, -1.0}) {
      Vector e = Vector::Zero(static_cast<Eigen::Index>(n));
      e(static_cast<Eigen::Index>(i)) = s;
      dirs.push_back(e);
    }
  if (n > 1) {
    const std::size_t count = std::min<std::size_t>(std::size_t{1} << n, 32);
    for (std::size_t mask = 0; mask < count; ++mask) {
      Vector e(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) e(static_cast<Eigen::Index>(i)) = (mask >> (i % 63)) & 1u ? -1.0 : 1.0;
      dirs.push_back(e.normalized());
    }
  }
  return dirs;
}

inline std::vector<Vector> boundary_points(std::size_t n, double R, double box) {
  std::vector<double> radii;
  for (double f : {1.0 + 1e-9, 1.001, 1.01, 1.1, 1.5}) radii.push_back(R * f);
  if (R > 0.0)
    for (double f : {1.0 - 1e-9, 0.99, 0.5, 0.0}) radii.push_back(R * f);
  if (R == 0.0)
    for (double r : {1e-6, 0.1, 1.0}) radii.push_back(r);
  std::vector<Vector> pts;
  for (const auto& d : boundary_directions(n))
    for (double r : radii)
      if (r <= box) pts.push_back(r * d);
  return pts;
}

}  // namespace detail

/// Sampling-based check of membership of y -> b(x, y) in S(kappa, R, lambda):
///   <b(u)-b(v), u-v> <= -kappa |u-v|^2   when the pair lies in the contraction region,
///   <b(u)-b(v), u-v> <=  lambda |u-v|^2  otherwise.
/// Pairs come from a shifted Sobol sequence on [-box, box]^{2n} plus a
/// deterministic grid of points around |u| = |v| = R. A failing certificate is
/// a valid result; its violations list holds every offending pair.
inline ContractivityCertificate check_semi_contractive(const DriftSpec& b, const Vector& x, double kappa, double R,
                                                       double lambda, std::size_t n_samples, double box_radius,
                                                       std::uint64_t seed = 0,
                                                       CertVariant variant = CertVariant::both_outside) {
  b.validate();
  if (n_samples < 1) throw ParameterError("check_semi_contractive: n_samples must be positive");
  if (!(box_radius > R)) throw ParameterError("check_semi_contractive: box_radius must exceed R");
  if (!(kappa >= 0.0) || !(R >= 0.0) || !(lambda >= 0.0)) throw ParameterError("check_semi_contractive: kappa, R, lambda must be >= 0");
  const std::size_t n = b.dim_y;
  ContractivityCertificate cert;
  cert.kappa = kappa;
  cert.R = R;
  cert.lambda = lambda;
  cert.seed = seed;
  cert.scheme = "sobol(2n, Cranley-Patterson shift) + boundary grid";
  cert.drift_id = b.id();
  cert.box_radius = box_radius;
  cert.variant = variant;
  cert.worst_margin = std::numeric_limits<double>::infinity();

  auto test_pair = [&](const Vector& u, const Vector& v) {
    const Vector d = u - v;
    const double d2 = d.squaredNorm();
    if (d2 == 0.0) return;
    const bool out_u = u.norm() > R, out_v = v.norm() > R;
    const bool contract = variant == CertVariant::both_outside ? (out_u && out_v) : (out_u || out_v);
    const double inner = (evaluate_drift(b, x, u) - evaluate_drift(b, x, v)).dot(d);
    const double margin = (contract ? -kappa : lambda) - inner / d2;
    ++cert.n_samples;
    cert.worst_margin = std::min(cert.worst_margin, margin);
    if (margin < -detail::kMarginTolerance) cert.violations.push_back({u, v, margin});
  };

  detail::ShiftedSobol sobol(2 * n, seed);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const auto p = sobol.next();
    Vector u(static_cast<Eigen::Index>(n)), v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      u(static_cast<Eigen::Index>(i)) = box_radius * (2.0 * p[i] - 1.0);
      v(static_cast<Eigen::Index>(i)) = box_radius * (2.0 * p[n + i] - 1.0);
    }
    test_pair(u, v);
  }
  const auto grid = detail::boundary_points(n, R, box_radius);
  for (const auto& u : grid)
    for (const auto& v : grid) test_pair(u, v);

  if (std::abs(cert.worst_margin) <= detail::kMarginTolerance) cert.worst_margin = 0.0;
  return cert;
}

/// Checks <b(u)-b(v), u-v> <= D - kappa_tilde |u-v|^2 on sampled pairs.
/// Margins are normalised by 1 + |u-v|^2; R is unused and reported as 0.
inline ContractivityCertificate check_offdiagonal(const DriftSpec& b, const Vector& x, double kappa_tilde, double D,
                                                  std::size_t n_samples, double box_radius, std::uint64_t seed = 0) {
  b.validate();
  if (n_samples < 1 || !(box_radius > 0.0)) throw ParameterError("check_offdiagonal: bad sampling parameters");
  const std::size_t n = b.dim_y;
  ContractivityCertificate cert;
  cert.kappa = kappa_tilde;
  cert.lambda = D;
  cert.seed = seed;
  cert.scheme = "off-diagonal; sobol(2n, Cranley-Patterson shift)";
  cert.drift_id = b.id();
  cert.box_radius = box_radius;
  cert.worst_margin = std::numeric_limits<double>::infinity();
  detail::ShiftedSobol sobol(2 * n, seed);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const auto p = sobol.next();
    Vector u(static_cast<Eigen::Index>(n)), v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      u(static_cast<Eigen::Index>(i)) = box_radius * (2.0 * p[i] - 1.0);
      v(static_cast<Eigen::Index>(i)) = box_radius * (2.0 * p[n + i] - 1.0);
    }
    const Vector d = u - v;
    const double d2 = d.squaredNorm();
    const double inner = (evaluate_drift(b, x, u) - evaluate_drift(b, x, v)).dot(d);
    const double margin = (D - kappa_tilde * d2 - inner) / (1.0 + d2);
    ++cert.n_samples;
    cert.worst_margin = std::min(cert.worst_margin, margin);
    if (margin < -detail::kMarginTolerance) cert.violations.push_back({u, v, margin});
  }
  if (std::abs(cert.worst_margin) <= detail::kMarginTolerance) cert.worst_margin = 0.0;
  return cert;
}

/// Radius beyond which contraction at the weaker rate kappa_bar holds against
/// every second point: with beta* = (kappa_bar + K) / (kappa + K), the
/// smallest R_bar >= R + 1 with (R_bar - R - 1) / (R_bar + R) >= beta*.
/// K is the Lipschitz constant of b on the ball of radius R + 1.
inline double enlarge_radius(double kappa, double kappa_bar, double R, double lip_on_ball) {
  if (!(kappa > 0.0) || !(kappa_bar > 0.0)) throw ParameterError("enlarge_radius: rates must be positive");
  if (!(kappa_bar < kappa)) throw ParameterError("enlarge_radius: kappa_bar must be below kappa (no finite radius otherwise)");
  if (!(R >= 0.0) || !(lip_on_ball >= 0.0)) throw ParameterError("enlarge_radius: R and Lipschitz bound must be >= 0");
  const double beta = (kappa_bar + lip_on_ball) / (kappa + lip_on_ball);
  return (R + 1.0 + beta * R) / (1.0 - beta);
}

/// Off-diagonal constant D = (kappa_tilde + lambda) (2 R_bar)^2.
inline double offdiagonal_constants(double kappa_tilde, double lambda, double R_bar) {
  if (!(kappa_tilde >= 0.0) || !(lambda >= 0.0) || !(R_bar >= 0.0))
    throw ParameterError("offdiagonal_constants: inputs must be >= 0");
  return (kappa_tilde + lambda) * 4.0 * R_bar * R_bar;
}

inline nlohmann::json to_json(const ContractivityCertificate& c, std::size_t max_witnesses = 100) {
  nlohmann::json w = nlohmann::json::array();
  for (std::size_t i = 0; i < c.violations.size() && i < max_witnesses; ++i) {
    const auto& v = c.violations[i];
    w.push_back({{"u", std::vector<double>(v.u.data(), v.u.data() + v.u.size())},
                 {"v", std::vector<double>(v.v.data(), v.v.data() + v.v.size())},
                 {"margin", v.margin}});
  }
  return {{"drift", c.drift_id},     {"kappa", c.kappa},
          {"R", c.R},                {"lambda", c.lambda},
          {"variant", to_string(c.variant)},
          {"n_samples", c.n_samples}, {"worst_margin", c.worst_margin},
          {"passed", c.passed()},    {"n_violations", c.violations.size()},
          {"witnesses", w},          {"seed", c.seed},
          {"scheme", c.scheme},      {"box_radius", c.box_radius}};
}

}  // namespace fracslow::drift
