#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlci/noise.hpp"

namespace nlci {

enum class NonlinearityKind { sign, clip, quantizer, identity };

// One affine piece of the map on the positive half-line:
// Psi(w) = slope * w + offset for w in (lo, hi]. The negative half-line is
// the odd mirror image and Psi(0) = 0.
struct Piece {
  double lo = 0.0;
  double hi = 0.0;  // may be +inf
  double slope = 0.0;
  double offset = 0.0;
};

// Odd scalar map applied to consensus differences (componentwise) and to
// innovation residuals. Immutable.
class Nonlinearity {
 public:
  static Nonlinearity sign();
  // Throws ParameterError unless tau > 0.
  static Nonlinearity clip(double tau);
  // Ascending positive thresholds t_1 < ... < t_K. Output on (t_{k-1}, t_k]
  // is the midpoint (t_{k-1} + t_k) / 2 with t_0 = 0; beyond t_K the last
  // midpoint is held.
  static Nonlinearity quantizer(std::vector<double> thresholds);
  static Nonlinearity identity();

  NonlinearityKind kind() const noexcept { return kind_; }
  double tau() const noexcept { return tau_; }
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  std::span<const Piece> pieces() const noexcept { return pieces_; }
  std::string describe() const;

  double operator()(double w) const noexcept;
  double apply(double w) const noexcept { return (*this)(w); }
  // In place, componentwise. Uses the SIMD kernels for sign and clip.
  void apply_inplace(std::span<double> v) const noexcept;
  std::vector<double> apply_vector(std::span<const double> v) const;

  // sup |Psi|, or nullopt when unbounded.
  std::optional<double> bound() const noexcept;
  // Bounded kinds satisfy every shape condition by construction; identity
  // does not.
  bool is_compliant() const noexcept { return bound().has_value(); }
  bool discontinuous_at_zero() const noexcept;

 private:
  Nonlinearity(NonlinearityKind kind, double tau, std::vector<double> thresholds,
               std::vector<Piece> pieces)
      : kind_(kind), tau_(tau), thresholds_(std::move(thresholds)), pieces_(std::move(pieces)) {}

  NonlinearityKind kind_;
  double tau_ = 0.0;
  std::vector<double> thresholds_;
  std::vector<Piece> pieces_;
};

// sigma^2 = int |Psi(w)|^2 p(w) dw, computed over (0, inf) and doubled.
// Throws DivergentVarianceError for an unbounded map with an
// infinite-variance density.
double effective_variance(const Nonlinearity& nl, const NoiseModel& m);

// Noise-smoothed map phi(u) = int Psi(u + w) p(w) dw.
double phi(const Nonlinearity& nl, const NoiseModel& m, double u);

// phi'(0). Sign uses the closed form 2 p(0); identity is exactly 1; other
// kinds use phi_prime_zero_numeric. Throws AssumptionViolation when the
// result is not positive.
double phi_prime_zero(const Nonlinearity& nl, const NoiseModel& m);

// Central differences of phi at h, h/2, h/4 combined by a two-level
// Richardson tableau that removes the O(h) and O(h^2) error terms (the O(h)
// term is present when p has a kink at zero, as the heavy-tail density does).
double phi_prime_zero_numeric(const Nonlinearity& nl, const NoiseModel& m, double h = 1e-4);

struct ShapeReport {
  bool odd = false;
  bool positive_on_positives = false;
  bool monotone = false;
  bool bounded = false;
  double c1 = 0.0;  // sup |Psi| on the grid (inf when unbounded)
  bool discontinuous_at_zero = false;
  bool strictly_increasing_near_zero = false;
  double c2 = 0.0;  // half-width of the strictly increasing window
  bool jump_or_slope = false;
  std::vector<std::string> failures;

  bool all_pass() const noexcept {
    return odd && positive_on_positives && monotone && bounded && jump_or_slope;
  }
};

// Grid must be symmetric about 0 (throws ParameterError otherwise).
ShapeReport validate_shape(const Nonlinearity& nl, std::span<const double> grid);

// 2 * half_count + 1 points symmetric about 0 on [-half_width, half_width],
// denser near 0.
std::vector<double> symmetric_grid(double half_width, std::size_t half_count);

}  // namespace nlci
