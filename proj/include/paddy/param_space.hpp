#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "paddy/errors.hpp"
#include "paddy/rng.hpp"

namespace paddy {

enum class ParamKind { Continuous, Integer };

inline const char* to_string(ParamKind k) {
  return k == ParamKind::Continuous ? "continuous" : "integer";
}

inline ParamKind parse_param_kind(const std::string& s) {
  if (s == "continuous") return ParamKind::Continuous;
  if (s == "integer") return ParamKind::Integer;
  throw config_error("unknown parameter kind '" + s + "'");
}

/// One dimension of the search space. Random initiation draws from the grid
/// {init_lo, init_lo + resolution, ...} while dispersion samples a Gaussian
/// around the parent value, so the initiation range may be a narrow slice of
/// the full limits. Integer parameters are rounded half away from zero after
/// every generation step; normalization requires two-sided limits.
struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::Continuous;
  std::optional<double> lower_limit;
  std::optional<double> upper_limit;
  double init_lo = 0.0;
  double init_hi = 1.0;
  double resolution = 0.01;
  bool normalize = false;

  bool operator==(const ParamSpec&) const = default;
};

struct SpaceSpec {
  std::vector<ParamSpec> params;

  std::size_t dimension() const { return params.size(); }

  bool operator==(const SpaceSpec&) const = default;
};

/// A candidate point, one value per space dimension.
using ParamVector = std::vector<double>;

namespace detail {
inline bool is_whole(double v) { return std::isfinite(v) && v == std::round(v); }
}  // namespace detail

inline void validate(const ParamSpec& p) {
  if (p.name.empty()) throw config_error("parameter name must not be empty");
  const std::string where = "parameter '" + p.name + "': ";
  if (!std::isfinite(p.init_lo) || !std::isfinite(p.init_hi))
    throw config_error(where + "initiation range must be finite");
  if (p.init_lo > p.init_hi) throw config_error(where + "init_lo exceeds init_hi");
  if (p.lower_limit && p.upper_limit && *p.lower_limit > *p.upper_limit)
    throw config_error(where + "lower limit exceeds upper limit");
  if (p.lower_limit && p.init_lo < *p.lower_limit)
    throw config_error(where + "initiation range extends below the lower limit");
  if (p.upper_limit && p.init_hi > *p.upper_limit)
    throw config_error(where + "initiation range extends above the upper limit");
  if (!(p.resolution > 0.0)) throw config_error(where + "resolution must be positive");
  if (p.init_hi > p.init_lo && p.resolution > p.init_hi - p.init_lo)
    throw config_error(where + "resolution exceeds the initiation range");
  if (p.normalize) {
    if (!p.lower_limit || !p.upper_limit)
      throw config_error(where + "normalization requires two-sided limits");
    if (!(*p.lower_limit < *p.upper_limit))
      throw config_error(where + "normalization requires lower limit < upper limit");
  }
  if (p.kind == ParamKind::Integer) {
    if (p.lower_limit && !detail::is_whole(*p.lower_limit))
      throw config_error(where + "integer parameter limits must be whole numbers");
    if (p.upper_limit && !detail::is_whole(*p.upper_limit))
      throw config_error(where + "integer parameter limits must be whole numbers");
  }
}

inline void validate(const SpaceSpec& space) {
  if (space.params.empty()) throw config_error("space must have at least one parameter");
  std::unordered_set<std::string> seen;
  for (const auto& p : space.params) {
    validate(p);
    if (!seen.insert(p.name).second)
      throw config_error("duplicate parameter name '" + p.name + "'");
  }
}

/// Rounds integer-kind values half away from zero, then clamps to whichever
/// limits are present. Idempotent.
inline double clamp(const ParamSpec& p, double value) {
  double v = value;
  if (p.kind == ParamKind::Integer) v = std::round(v);
  if (p.lower_limit && v < *p.lower_limit) v = *p.lower_limit;
  if (p.upper_limit && v > *p.upper_limit) v = *p.upper_limit;
  return v;
}

/// Min-max normalization against the parameter limits.
inline double normalize(const ParamSpec& p, double value) {
  if (!p.normalize || !p.lower_limit || !p.upper_limit)
    throw config_error("normalize called on parameter '" + p.name +
                       "' without normalization enabled and two-sided limits");
  return (value - *p.lower_limit) / (*p.upper_limit - *p.lower_limit);
}

/// Inverse of normalize, followed by clamp.
inline double denormalize(const ParamSpec& p, double unit) {
  if (!p.normalize || !p.lower_limit || !p.upper_limit)
    throw config_error("denormalize called on parameter '" + p.name +
                       "' without normalization enabled and two-sided limits");
  return clamp(p, *p.lower_limit + unit * (*p.upper_limit - *p.lower_limit));
}

/// Number of points in the initiation grid. The upper endpoint is included
/// only when it sits on the grid (within 1e-9 relative of an exact multiple
/// of the resolution); otherwise the grid truncates at the last reachable
/// point below init_hi.
inline std::size_t grid_point_count(const ParamSpec& p) {
  const double span = p.init_hi - p.init_lo;
  if (!(span > 0.0)) return 1;
  const double ratio = span / p.resolution;
  auto k = static_cast<long long>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, std::abs(ratio)))
    k = static_cast<long long>(std::floor(ratio));
  return static_cast<std::size_t>(k) + 1;
}

/// Uniform draw from each parameter's initiation grid, with integer rounding
/// and limit clamping applied afterward.
inline ParamVector random_sow(const SpaceSpec& space, Rng& rng) {
  validate(space);
  ParamVector out(space.params.size());
  for (std::size_t i = 0; i < space.params.size(); ++i) {
    const ParamSpec& p = space.params[i];
    const std::size_t n = grid_point_count(p);
    double v = p.init_lo + static_cast<double>(rng.below(n)) * p.resolution;
    v = std::min(v, p.init_hi);  // guard FP overshoot at the last grid point
    out[i] = clamp(p, v);
  }
  return out;
}

/// Euclidean distance; parameters with normalize=true contribute in
/// normalized coordinates, the rest in raw coordinates, so a single radius
/// stays meaningful across heterogeneous scales.
inline double distance(const SpaceSpec& space, const ParamVector& a, const ParamVector& b) {
  if (a.size() != space.params.size() || b.size() != space.params.size())
    throw std::invalid_argument("distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < space.params.size(); ++i) {
    const ParamSpec& p = space.params[i];
    double da = a[i];
    double db = b[i];
    if (p.normalize) {
      da = normalize(p, da);
      db = normalize(p, db);
    }
    const double d = da - db;
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace paddy
