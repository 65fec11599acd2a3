#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracslow/core/error.hpp"
#include "fracslow/core/sample_path.hpp"

namespace fracslow::drift {

enum class DriftKind { linear, mean_field, double_well, cubic, table };
enum class MeanFunction { zero, identity, sin, cos, tanh };

inline std::string to_string(DriftKind k) {
  switch (k) {
    case DriftKind::linear: return "linear";
    case DriftKind::mean_field: return "mean-field";
    case DriftKind::double_well: return "double-well";
    case DriftKind::cubic: return "cubic";
    case DriftKind::table: return "table";
  }
  return "?";
}

inline std::string to_string(MeanFunction m) {
  switch (m) {
    case MeanFunction::zero: return "zero";
    case MeanFunction::identity: return "identity";
    case MeanFunction::sin: return "sin";
    case MeanFunction::cos: return "cos";
    case MeanFunction::tanh: return "tanh";
  }
  return "?";
}

inline DriftKind drift_kind_from_string(const std::string& s) {
  for (auto k : {DriftKind::linear, DriftKind::mean_field, DriftKind::double_well, DriftKind::cubic, DriftKind::table})
    if (to_string(k) == s) return k;
  throw ParameterError("unknown drift kind '" + s + "'");
}

inline MeanFunction mean_function_from_string(const std::string& s) {
  for (auto m : {MeanFunction::zero, MeanFunction::identity, MeanFunction::sin, MeanFunction::cos, MeanFunction::tanh})
    if (to_string(m) == s) return m;
  throw ParameterError("unknown mean function '" + s + "'");
}

inline double apply_mean(MeanFunction m, double x) {
  switch (m) {
    case MeanFunction::zero: return 0.0;
    case MeanFunction::identity: return x;
    case MeanFunction::sin: return std::sin(x);
    case MeanFunction::cos: return std::cos(x);
    case MeanFunction::tanh: return std::tanh(x);
  }
  return 0.0;
}

/// Fast drift b(x, y) from the built-in library.
///
///   linear       b = -rate * y + offset                 (rate < 0 is expansive)
///   mean-field   b = -rate * (y - m(x)), m componentwise
///   double-well  b = -grad V, V = alpha |y|^4 - beta |y|^2 inside |y| <= rho;
///                the radial profile 4 alpha r^3 - 2 beta r continues linearly
///                (C^1) beyond rho so the Jacobian stays bounded
///   cubic        b = y - y^3 componentwise
///   table        1D piecewise-linear b(y) through (table_y, table_b),
///                extended with the end slopes
struct DriftSpec {
  DriftKind kind = DriftKind::linear;
  std::size_t dim_x = 1;
  std::size_t dim_y = 1;
  double rate = 1.0;
  double offset = 0.0;
  MeanFunction mean = MeanFunction::zero;
  double alpha = 1.0;
  double beta = 0.0;
  double rho = 3.0;
  std::vector<double> table_y;
  std::vector<double> table_b;

  static DriftSpec linear(double rate, std::size_t dim = 1, double offset = 0.0) {
    DriftSpec s;
    s.kind = DriftKind::linear;
    s.rate = rate;
    s.offset = offset;
    s.dim_x = s.dim_y = dim;
    return s;
  }
  static DriftSpec mean_field(MeanFunction m, double rate = 1.0, std::size_t dim = 1) {
    DriftSpec s;
    s.kind = DriftKind::mean_field;
    s.mean = m;
    s.rate = rate;
    s.dim_x = s.dim_y = dim;
    return s;
  }
  static DriftSpec double_well(double alpha, double beta, double rho, std::size_t dim = 1) {
    DriftSpec s;
    s.kind = DriftKind::double_well;
    s.alpha = alpha;
    s.beta = beta;
    s.rho = rho;
    s.dim_x = s.dim_y = dim;
    return s;
  }
  static DriftSpec cubic(std::size_t dim = 1) {
    DriftSpec s;
    s.kind = DriftKind::cubic;
    s.dim_x = s.dim_y = dim;
    return s;
  }
  static DriftSpec table(std::vector<double> ys, std::vector<double> bs) {
    DriftSpec s;
    s.kind = DriftKind::table;
    s.table_y = std::move(ys);
    s.table_b = std::move(bs);
    s.validate();
    return s;
  }

  void validate() const {
    if (dim_y < 1 || dim_x < 1) throw ParameterError("drift: dimensions must be positive");
    if (!std::isfinite(rate) || !std::isfinite(offset)) throw ParameterError("drift: rate and offset must be finite");
    if (kind == DriftKind::mean_field && dim_x != dim_y && dim_x != 1)
      throw ParameterError("drift: mean-field needs dim_x == dim_y or dim_x == 1");
    if (kind == DriftKind::double_well) {
      if (!(alpha > 0.0) || !(beta >= 0.0) || !(rho > 0.0)) throw ParameterError("drift: double-well needs alpha > 0, beta >= 0, rho > 0");
      if (12.0 * alpha * rho * rho - 2.0 * beta <= 0.0) throw ParameterError("drift: double-well cutoff rho lies inside the repulsive core");
    }
    if (kind == DriftKind::table) {
      if (dim_y != 1) throw ParameterError("drift: table drift is one-dimensional");
      if (table_y.size() < 2 || table_y.size() != table_b.size()) throw ParameterError("drift: table needs >= 2 matching nodes");
      for (std::size_t i = 1; i < table_y.size(); ++i)
        if (!(table_y[i] > table_y[i - 1])) throw ParameterError("drift: table nodes must be strictly increasing");
    }
  }

  /// Short stable identifier for provenance records.
  std::string id() const {
    std::ostringstream os;
    os.precision(12);
    os << to_string(kind);
    switch (kind) {
      case DriftKind::linear: os << "(rate=" << rate << ",offset=" << offset << ")"; break;
      case DriftKind::mean_field: os << "(m=" << to_string(mean) << ",rate=" << rate << ")"; break;
      case DriftKind::double_well: os << "(alpha=" << alpha << ",beta=" << beta << ",rho=" << rho << ")"; break;
      case DriftKind::cubic: break;
      case DriftKind::table: os << "(nodes=" << table_y.size() << ")"; break;
    }
    os << "[" << dim_x << "x" << dim_y << "]";
    return os.str();
  }
};

namespace detail {

// Radial profile of the double-well field, b(y) = -phi(|y|) y / |y|.
inline double double_well_phi(const DriftSpec& s, double r) {
  if (r <= s.rho) return 4.0 * s.alpha * r * r * r - 2.0 * s.beta * r;
  const double at = 4.0 * s.alpha * s.rho * s.rho * s.rho - 2.0 * s.beta * s.rho;
  const double slope = 12.0 * s.alpha * s.rho * s.rho - 2.0 * s.beta;
  return at + slope * (r - s.rho);
}

inline double table_eval(const DriftSpec& s, double y) {
  const auto& ys = s.table_y;
  const auto& bs = s.table_b;
  std::size_t i = 0;
  if (y <= ys.front()) {
    i = 0;
  } else if (y >= ys.back()) {
    i = ys.size() - 2;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin()) - 1;
  }
  const double w = (y - ys[i]) / (ys[i + 1] - ys[i]);
  return bs[i] + w * (bs[i + 1] - bs[i]);
}

}  // namespace detail

/// b(x, y). Throws DimensionError on size mismatch.
inline Vector evaluate_drift(const DriftSpec& b, const Vector& x, const Vector& y) {
  if (static_cast<std::size_t>(y.size()) != b.dim_y) throw DimensionError("evaluate_drift: y has wrong dimension");
  if (static_cast<std::size_t>(x.size()) != b.dim_x) throw DimensionError("evaluate_drift: x has wrong dimension");
  Vector out(y.size());
  switch (b.kind) {
    case DriftKind::linear:
      out = -b.rate * y;
      out.array() += b.offset;
      break;
    case DriftKind::mean_field:
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double xi = b.dim_x == 1 ? x(0) : x(i);
        out(i) = -b.rate * (y(i) - apply_mean(b.mean, xi));
      }
      break;
    case DriftKind::double_well: {
      const double r = y.norm();
      out = r > 0.0 ? Vector(-detail::double_well_phi(b, r) / r * y) : Vector::Zero(y.size());
      break;
    }
    case DriftKind::cubic:
      out = y.array() - y.array().cube();
      break;
    case DriftKind::table:
      out(0) = detail::table_eval(b, y(0));
      break;
  }
  return out;
}

/// Scalar fast path for dim_x = dim_y = 1 (no allocation; used in hot loops).
inline double drift_scalar(const DriftSpec& b, double x, double y) {
  switch (b.kind) {
    case DriftKind::linear: return -b.rate * y + b.offset;
    case DriftKind::mean_field: return -b.rate * (y - apply_mean(b.mean, x));
    case DriftKind::double_well: {
      const double r = std::abs(y);
      return r > 0.0 ? -detail::double_well_phi(b, r) * (y > 0.0 ? 1.0 : -1.0) : 0.0;
    }
    case DriftKind::cubic: return y - y * y * y;
    case DriftKind::table: return detail::table_eval(b, y);
  }
  return 0.0;
}

/// Lipschitz constant of y -> b(x, y) on the ball |y| <= radius.
inline double lipschitz_on_ball(const DriftSpec& b, double radius) {
  switch (b.kind) {
    case DriftKind::linear:
    case DriftKind::mean_field: return std::abs(b.rate);
    case DriftKind::double_well: {
      const double r = std::min(radius, b.rho);
      return std::max(12.0 * b.alpha * r * r - 2.0 * b.beta, 2.0 * b.beta);
    }
    case DriftKind::cubic: return std::max(1.0, 3.0 * radius * radius - 1.0);
    case DriftKind::table: {
      double m = 0.0;
      for (std::size_t i = 1; i < b.table_y.size(); ++i)
        m = std::max(m, std::abs((b.table_b[i] - b.table_b[i - 1]) / (b.table_y[i] - b.table_y[i - 1])));
      return m;
    }
  }
  return 0.0;
}

/// Global Lipschitz bound in y (infinite for the cubic drift).
inline double lipschitz_bound(const DriftSpec& b) {
  if (b.kind == DriftKind::cubic) return std::numeric_limits<double>::infinity();
  return lipschitz_on_ball(b, std::numeric_limits<double>::infinity());
}

/// Lipschitz constant of x -> b(x, y).
inline double lipschitz_in_x(const DriftSpec& b) {
  if (b.kind != DriftKind::mean_field) return 0.0;
  return b.mean == MeanFunction::zero ? 0.0 : std::abs(b.rate);
}

/// Constant C with |b(x, y)| <= C (1 + |x| + |y|).
inline double growth_constant(const DriftSpec& b) {
  const double sqrt_n = std::sqrt(static_cast<double>(b.dim_y));
  switch (b.kind) {
    case DriftKind::linear: return std::max(std::abs(b.rate), std::abs(b.offset) * sqrt_n);
    case DriftKind::mean_field: return std::abs(b.rate) * std::max(1.0, sqrt_n);
    case DriftKind::double_well: {
      double peak = 0.0;
      for (int k = 0; k <= 256; ++k) peak = std::max(peak, std::abs(detail::double_well_phi(b, b.rho * k / 256.0)));
      return std::max(peak, lipschitz_bound(b));
    }
    case DriftKind::cubic: return std::numeric_limits<double>::infinity();
    case DriftKind::table: {
      const double at0 = std::max(std::abs(b.table_b.front()), std::abs(b.table_b.back()));
      const double reach = std::max(std::abs(b.table_y.front()), std::abs(b.table_y.back()));
      return std::max(at0 + lipschitz_bound(b) * reach, lipschitz_bound(b));
    }
  }
  return 0.0;
}

inline nlohmann::json to_json(const DriftSpec& b) {
  nlohmann::json j{{"kind", to_string(b.kind)}, {"dim_x", b.dim_x}, {"dim_y", b.dim_y}};
  switch (b.kind) {
    case DriftKind::linear: j["rate"] = b.rate; j["offset"] = b.offset; break;
    case DriftKind::mean_field: j["m"] = to_string(b.mean); j["rate"] = b.rate; break;
    case DriftKind::double_well: j["alpha"] = b.alpha; j["beta"] = b.beta; j["rho"] = b.rho; break;
    case DriftKind::cubic: break;
    case DriftKind::table: j["y"] = b.table_y; j["b"] = b.table_b; break;
  }
  return j;
}

/// Parses a drift record. `dim` overrides dim_x/dim_y when present.
inline DriftSpec drift_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw SchemaError("drift: expected an object with a 'kind' field");
  DriftSpec s;
  s.kind = drift_kind_from_string(j.at("kind").get<std::string>());
  auto num = [&](const char* key, double dflt) { return j.contains(key) ? j.at(key).get<double>() : dflt; };
  const std::size_t dim = j.value("dim", std::size_t{1});
  s.dim_x = j.value("dim_x", dim);
  s.dim_y = j.value("dim_y", dim);
  s.rate = num("rate", 1.0);
  s.offset = num("offset", 0.0);
  if (j.contains("m")) s.mean = mean_function_from_string(j.at("m").get<std::string>());
  s.alpha = num("alpha", 1.0);
  s.beta = num("beta", 0.0);
  s.rho = num("rho", 3.0);
  if (s.kind == DriftKind::table) {
    s.table_y = j.at("y").get<std::vector<double>>();
    s.table_b = j.at("b").get<std::vector<double>>();
    s.dim_x = s.dim_y = 1;
  }
  s.validate();
  return s;
}

}  // namespace fracslow::drift
