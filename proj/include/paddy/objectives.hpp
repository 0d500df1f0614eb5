#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "paddy/engine.hpp"
#include "paddy/param_space.hpp"

namespace paddy {

// ---------------------------------------------------------------------------
// Analytic benchmark surfaces
// ---------------------------------------------------------------------------

/// Two-Gaussian surface on the plane: a 0.80-amplitude bump at (0.5, 0.5) and
/// a 0.88-amplitude bump at (0.6, 0.1), both with squared-width 0.09.
inline double bimodal(double x, double y) {
  const double d1 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
  const double d2 = (x - 0.6) * (x - 0.6) + (y - 0.1) * (y - 0.1);
  return 0.80 * std::exp(-d1 / 0.09) + 0.88 * std::exp(-d2 / 0.09);
}

/// Gramacy & Lee curve sin(10*pi*x)/(2x) + (x-1)^4 on [-0.5, 2.5]. The
/// removable singularity at x = 0 is filled with its limit 5*pi.
inline double gramacy_lee(double x) {
  if (x < -0.5 || x > 2.5) throw std::domain_error("gramacy_lee: x outside [-0.5, 2.5]");
  const double quartic = (x - 1.0) * (x - 1.0) * (x - 1.0) * (x - 1.0);
  if (x == 0.0) return 5.0 * std::numbers::pi + quartic;
  return std::sin(10.0 * std::numbers::pi * x) / (2.0 * x) + quartic;
}

// ---------------------------------------------------------------------------
// Trigonometric interpolation
// ---------------------------------------------------------------------------

inline constexpr int kTrigDegree = 32;
inline constexpr int kTrigCoefficients = 2 * kTrigDegree + 1;  // 65

/// Degree-32 trigonometric polynomial
///   a0 + sum_{k=1..32} a_k cos(kx) + b_k sin(kx).
struct TrigPolynomial {
  double a0 = 0.0;
  std::array<double, kTrigDegree> cos_coeffs{};
  std::array<double, kTrigDegree> sin_coeffs{};
};

/// Coefficient layout inside a 65-value parameter vector: [a0, a1..a32, b1..b32].
inline TrigPolynomial trig_polynomial_from_params(const ParamVector& params) {
  if (params.size() != kTrigCoefficients)
    throw std::invalid_argument("trig_polynomial_from_params: expected 65 values");
  TrigPolynomial p;
  p.a0 = params[0];
  for (int k = 0; k < kTrigDegree; ++k) {
    p.cos_coeffs[k] = params[1 + k];
    p.sin_coeffs[k] = params[1 + kTrigDegree + k];
  }
  return p;
}

/// Evaluates the polynomial with the cos/sin recurrence
/// f(k+1) = 2 cos(x) f(k) - f(k-1), two trig calls per point.
inline double trig_poly_eval(const TrigPolynomial& p, double x) {
  const double c1 = std::cos(x);
  const double s1 = std::sin(x);
  double ck = c1, sk = s1;      // cos(kx), sin(kx) for k = 1
  double ckm1 = 1.0, skm1 = 0.0;  // k = 0
  double acc = p.a0;
  for (int k = 0; k < kTrigDegree; ++k) {
    acc += p.cos_coeffs[k] * ck + p.sin_coeffs[k] * sk;
    const double cn = 2.0 * c1 * ck - ckm1;
    const double sn = 2.0 * c1 * sk - skm1;
    ckm1 = ck;
    skm1 = sk;
    ck = cn;
    sk = sn;
  }
  return acc;
}

/// Evaluation grid for the interpolation benchmark: x = -0.5 + 0.001*k over
/// [-0.5, 2.5], 3001 points. Written as (k - 500) * 0.001 so the x = 0 grid
/// point is exact.
inline constexpr int kGramacyLeeGridSize = 3001;

inline double gramacy_lee_grid_point(int k) { return static_cast<double>(k - 500) * 0.001; }

inline const std::array<double, kGramacyLeeGridSize>& gramacy_lee_targets() {
  static const std::array<double, kGramacyLeeGridSize> table = [] {
    std::array<double, kGramacyLeeGridSize> t{};
    for (int k = 0; k < kGramacyLeeGridSize; ++k) t[k] = gramacy_lee(gramacy_lee_grid_point(k));
    return t;
  }();
  return table;
}

/// Mean squared error between the polynomial and the Gramacy & Lee curve on
/// the benchmark grid.
inline double interpolation_mse(const TrigPolynomial& p) {
  const auto& targets = gramacy_lee_targets();
  double acc = 0.0;
  for (int k = 0; k < kGramacyLeeGridSize; ++k) {
    const double r = targets[k] - trig_poly_eval(p, gramacy_lee_grid_point(k));
    acc += r * r;
  }
  return acc / static_cast<double>(kGramacyLeeGridSize);
}

/// Interpolation fitness is the negated MSE, so the maximizing engine
/// minimizes the error.
inline double interpolation_fitness(const TrigPolynomial& p) { return -interpolation_mse(p); }

// ---------------------------------------------------------------------------
// Set similarity and molecule scoring
// ---------------------------------------------------------------------------

/// On-bit indices of a hashed fingerprint, treated as an opaque set.
using Fingerprint = std::set<std::int64_t>;

/// Tversky similarity |X&Y| / (|X&Y| + alpha|X\Y| + beta|Y\X|). The pair
/// alpha = beta = 1 is the Tanimoto coefficient. An empty X scores 0; two
/// empty sets have no defined similarity.
inline double tversky(const Fingerprint& x, const Fingerprint& y, double alpha, double beta) {
  if (alpha < 0.0 || beta < 0.0)
    throw std::domain_error("tversky: alpha and beta must be non-negative");
  if (x.empty() && y.empty()) throw std::domain_error("tversky: both sets empty");
  if (x.empty()) return 0.0;
  std::size_t common = 0;
  auto ix = x.begin();
  auto iy = y.begin();
  while (ix != x.end() && iy != y.end()) {
    if (*ix < *iy) {
      ++ix;
    } else if (*iy < *ix) {
      ++iy;
    } else {
      ++common;
      ++ix;
      ++iy;
    }
  }
  const double in_both = static_cast<double>(common);
  const double only_x = static_cast<double>(x.size() - common);
  const double only_y = static_cast<double>(y.size() - common);
  return in_both / (in_both + alpha * only_x + beta * only_y);
}

/// Rotatable bond score: penalizes very rigid (mr <= 2) and very floppy
/// (mr >= 7) molecules, zero in between.
inline double rotatable_bond_score(int mr) {
  if (mr < 0) throw std::domain_error("rotatable_bond_score: mr must be non-negative");
  if (mr <= 2) return 2.0 - mr;
  if (mr >= 7) return mr - 5.0;
  return 0.0;
}

/// Cycle count score: zero for two-to-five rings, otherwise the distance to
/// that band.
inline double cycle_count_score(int mc) {
  if (mc < 0) throw std::domain_error("cycle_count_score: mc must be non-negative");
  if (mc <= 2) return std::abs(mc - 2.0);
  if (mc > 5) return std::abs(mc - 5.0);
  return 0.0;
}

/// Bit-on score: 1 for fingerprints with at least 45 on bits, otherwise a
/// negative penalty 0.6 * (mb - 45), exactly as defined.
inline double bit_on_score(int mb) {
  if (mb < 0) throw std::domain_error("bit_on_score: mb must be non-negative");
  if (mb >= 45) return 1.0;
  return 0.6 * (mb - 45.0);
}

/// Precomputed molecular descriptors. Fingerprints, density, bond and ring
/// counts, and synthetic-accessibility scores are inputs here, not computed.
struct MoleculeFeatures {
  Fingerprint fingerprint;   // on-bit indices; may be empty when unavailable
  double fp_density = 0.0;   // FD
  int rotatable_bonds = 0;   // mr
  int cycle_count = 0;       // mc
  int on_bits = 0;           // mb; equals fingerprint.size() when non-empty
  double sa_score = 1.0;     // SA, must be positive
  int large_cycle_count = 0; // rings with more than 6 atoms
};

/// Multi-feature molecule score
///   TV * FD^2 * BOS * 0.1^(RBS*CCS) * (1/SA + cycle).
inline double custom_metric(const MoleculeFeatures& m, const Fingerprint& target_fp,
                            double alpha, double beta) {
  if (!(m.sa_score > 0.0)) throw std::domain_error("custom_metric: sa_score must be positive");
  if (target_fp.empty()) throw std::domain_error("custom_metric: target fingerprint empty");
  const double tv = tversky(m.fingerprint, target_fp, alpha, beta);
  const double penalty =
      std::pow(0.1, rotatable_bond_score(m.rotatable_bonds) * cycle_count_score(m.cycle_count));
  return tv * m.fp_density * m.fp_density * bit_on_score(m.on_bits) * penalty *
         (1.0 / m.sa_score + static_cast<double>(m.large_cycle_count));
}

// ---------------------------------------------------------------------------
// Feature-record ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline Fingerprint parse_bit_list(const std::string& token, const std::string& where) {
  Fingerprint bits;
  if (token == "-") return bits;
  std::stringstream ss(token);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw std::runtime_error(where + ": empty entry in bit list");
    std::size_t pos = 0;
    long long value = 0;
    try {
      value = std::stoll(item, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error(where + ": bad bit index '" + item + "'");
    }
    if (pos != item.size()) throw std::runtime_error(where + ": bad bit index '" + item + "'");
    bits.insert(value);
  }
  if (bits.empty()) throw std::runtime_error(where + ": bit list reduced to nothing");
  return bits;
}

}  // namespace detail

/// Reads feature records from a line-oriented table. Each non-comment line
/// holds seven whitespace-separated columns:
///   onbits fd mr mc mb sa cycle
/// where onbits is a comma-separated list of integers, or "-" when the
/// fingerprint is unavailable. Lines starting with '#' are skipped.
inline std::vector<MoleculeFeatures> read_molecule_features(std::istream& in) {
  std::vector<MoleculeFeatures> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "features line " + std::to_string(line_no);
    std::istringstream row(line);
    std::string bits_token;
    if (!(row >> bits_token)) continue;  // blank line
    if (bits_token.front() == '#') continue;

    MoleculeFeatures m;
    m.fingerprint = detail::parse_bit_list(bits_token, where);
    if (!(row >> m.fp_density >> m.rotatable_bonds >> m.cycle_count >> m.on_bits >>
          m.sa_score >> m.large_cycle_count))
      throw std::runtime_error(where + ": expected 7 columns (onbits fd mr mc mb sa cycle)");
    std::string extra;
    if (row >> extra) throw std::runtime_error(where + ": trailing data '" + extra + "'");

    if (m.fp_density < 0.0) throw std::runtime_error(where + ": fd must be non-negative");
    if (m.rotatable_bonds < 0 || m.cycle_count < 0 || m.on_bits < 0 || m.large_cycle_count < 0)
      throw std::runtime_error(where + ": counts must be non-negative");
    if (!(m.sa_score > 0.0)) throw std::runtime_error(where + ": sa must be positive");
    if (!m.fingerprint.empty() &&
        m.on_bits != static_cast<int>(m.fingerprint.size()))
      throw std::runtime_error(where + ": mb does not match the number of on bits");
    records.push_back(std::move(m));
  }
  return records;
}

/// Reads a fingerprint as whitespace-separated integers; must be non-empty.
inline Fingerprint read_fingerprint(std::istream& in) {
  Fingerprint bits;
  long long value = 0;
  while (in >> value) bits.insert(value);
  if (!in.eof()) throw std::runtime_error("fingerprint file: non-integer content");
  if (bits.empty()) throw std::runtime_error("fingerprint file: no bits");
  return bits;
}

// ---------------------------------------------------------------------------
// Hyperparameter surrogate
// ---------------------------------------------------------------------------

/// Box the surrogate is defined on: two integer layer widths and two dropout
/// rates.
inline constexpr double kSurrogateLayer1Lo = 300.0, kSurrogateLayer1Hi = 3000.0;
inline constexpr double kSurrogateLayer2Lo = 32.0, kSurrogateLayer2Hi = 2000.0;

/// Documented argmax and maximum of the surrogate. The maximum is attained
/// exactly at (1800, 400, 0.35, 0.15) and equals 1.0.
inline constexpr std::array<double, 4> kSurrogateArgmax = {1800.0, 400.0, 0.35, 0.15};
inline constexpr double kSurrogateMaximum = 1.0;

/// Smooth stand-in for a network-training objective: a single Gaussian bump
/// in range-normalized coordinates,
///   f(v) = exp(-sum_i ((u_i - c_i) / 1.2)^2),  u_i = (v_i - lo_i)/(hi_i - lo_i),
/// centered on the documented argmax. Unimodal on the box, maximum 1.0.
inline double surrogate_hyperparam(const ParamVector& params) {
  if (params.size() != 4) throw std::domain_error("surrogate_hyperparam: expected 4 values");
  constexpr double lo[4] = {kSurrogateLayer1Lo, kSurrogateLayer2Lo, 0.0, 0.0};
  constexpr double hi[4] = {kSurrogateLayer1Hi, kSurrogateLayer2Hi, 1.0, 1.0};
  constexpr double width = 1.2;
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (params[i] < lo[i] || params[i] > hi[i])
      throw std::domain_error("surrogate_hyperparam: value outside the parameter box");
    const double u = (params[i] - lo[i]) / (hi[i] - lo[i]);
    const double c = (kSurrogateArgmax[i] - lo[i]) / (hi[i] - lo[i]);
    const double z = (u - c) / width;
    acc += z * z;
  }
  return std::exp(-acc);
}

// ---------------------------------------------------------------------------
// Objective wrappers
// ---------------------------------------------------------------------------

inline Objective make_bimodal_objective() {
  return {[](const ParamVector& p) { return bimodal(p[0], p[1]); }, 2,
          "two-gaussian surface on the unit square"};
}

inline Objective make_gramacy_lee_objective() {
  return {[](const ParamVector& p) { return interpolation_fitness(trig_polynomial_from_params(p)); },
          kTrigCoefficients,
          "negated interpolation MSE of a degree-32 trigonometric polynomial "
          "against the Gramacy & Lee curve"};
}

inline Objective make_surrogate_objective() {
  return {[](const ParamVector& p) { return surrogate_hyperparam(p); }, 4,
          "smooth surrogate for MLP hyperparameter tuning"};
}

}  // namespace paddy
