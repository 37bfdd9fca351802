#include "nlci/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nlci/errors.hpp"
#include "nlci/simd/kernels.hpp"
#include "quadrature.hpp"

namespace nlci {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Probability mass of (lo, hi] under m, using the upper tail when lo > 0 so
// that thin tails are not lost to cancellation.
double mass(const NoiseModel& m, double lo, double hi) {
  if (lo >= 0.0) {
    const double upper_lo = m.cdf(-lo);
    const double upper_hi = std::isinf(hi) ? 0.0 : m.cdf(-hi);
    return upper_lo - upper_hi;
  }
  const double f_hi = std::isinf(hi) ? 1.0 : m.cdf(hi);
  const double f_lo = std::isinf(lo) ? 0.0 : m.cdf(lo);
  return f_hi - f_lo;
}

}  // namespace

Nonlinearity Nonlinearity::sign() {
  return Nonlinearity(NonlinearityKind::sign, 0.0, {}, {{0.0, kInf, 0.0, 1.0}});
}

Nonlinearity Nonlinearity::clip(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ParameterError("clip threshold tau must be positive and finite");
  }
  return Nonlinearity(NonlinearityKind::clip, tau, {},
                      {{0.0, tau, 1.0, 0.0}, {tau, kInf, 0.0, tau}});
}

Nonlinearity Nonlinearity::quantizer(std::vector<double> thresholds) {
  if (thresholds.empty()) throw ParameterError("quantizer needs at least one threshold");
  double prev = 0.0;
  for (double t : thresholds) {
    if (!(t > prev) || !std::isfinite(t)) {
      throw ParameterError("quantizer thresholds must be positive, finite and strictly ascending");
    }
    prev = t;
  }
  std::vector<Piece> pieces;
  prev = 0.0;
  double level = 0.0;
  for (double t : thresholds) {
    level = 0.5 * (prev + t);
    pieces.push_back({prev, t, 0.0, level});
    prev = t;
  }
  pieces.push_back({prev, kInf, 0.0, level});
  return Nonlinearity(NonlinearityKind::quantizer, 0.0, std::move(thresholds), std::move(pieces));
}

Nonlinearity Nonlinearity::identity() {
  return Nonlinearity(NonlinearityKind::identity, 0.0, {}, {{0.0, kInf, 1.0, 0.0}});
}

std::string Nonlinearity::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case NonlinearityKind::sign:
      out << "sign";
      break;
    case NonlinearityKind::clip:
      out << "clip(tau=" << tau_ << ")";
      break;
    case NonlinearityKind::quantizer:
      out << "quantizer(levels=";
      for (std::size_t i = 0; i < thresholds_.size(); ++i) out << (i ? "," : "") << thresholds_[i];
      out << ")";
      break;
    case NonlinearityKind::identity:
      out << "identity";
      break;
  }
  return out.str();
}

double Nonlinearity::operator()(double w) const noexcept {
  switch (kind_) {
    case NonlinearityKind::sign:
      return (w > 0.0 ? 1.0 : 0.0) - (w < 0.0 ? 1.0 : 0.0);
    case NonlinearityKind::clip: {
      const double y = -tau_ > w ? -tau_ : w;
      return tau_ < y ? tau_ : y;
    }
    case NonlinearityKind::quantizer: {
      if (w == 0.0 || std::isnan(w)) return 0.0;
      const double a = std::abs(w);
      const auto it = std::lower_bound(thresholds_.begin(), thresholds_.end(), a);
      const std::size_t k = std::min(static_cast<std::size_t>(it - thresholds_.begin()),
                                     pieces_.size() - 1);
      return std::copysign(pieces_[k].offset, w);
    }
    case NonlinearityKind::identity:
      return w;
  }
  return w;
}

void Nonlinearity::apply_inplace(std::span<double> v) const noexcept {
  switch (kind_) {
    case NonlinearityKind::sign:
      simd::apply_sign(v);
      return;
    case NonlinearityKind::clip:
      simd::apply_clip(v, tau_);
      return;
    case NonlinearityKind::identity:
      return;
    case NonlinearityKind::quantizer:
      for (double& x : v) x = (*this)(x);
      return;
  }
}

std::vector<double> Nonlinearity::apply_vector(std::span<const double> v) const {
  std::vector<double> out(v.begin(), v.end());
  apply_inplace(out);
  return out;
}

std::optional<double> Nonlinearity::bound() const noexcept {
  const Piece& last = pieces_.back();
  if (last.slope != 0.0) return std::nullopt;
  double c1 = 0.0;
  for (const auto& p : pieces_) {
    c1 = std::max({c1, std::abs(p.offset + p.slope * p.lo), std::abs(p.offset + p.slope * p.hi)});
  }
  return c1;
}

bool Nonlinearity::discontinuous_at_zero() const noexcept { return pieces_.front().offset != 0.0; }

double effective_variance(const Nonlinearity& nl, const NoiseModel& m) {
  double half = 0.0;
  for (const auto& p : nl.pieces()) {
    if (p.slope == 0.0) {
      half += p.offset * p.offset * mass(m, p.lo, p.hi);
      continue;
    }
    if (std::isinf(p.hi)) {
      if (!m.has_finite_variance()) {
        throw DivergentVarianceError("effective variance of " + nl.describe() + " under " +
                                     m.describe() + " diverges (unbounded map, infinite-variance noise)");
      }
      if (p.lo == 0.0 && p.offset == 0.0) {
        half += p.slope * p.slope * 0.5 * m.variance();
        continue;
      }
    }
    half += detail::integrate(
        [&](double w) {
          const double psi = p.slope * w + p.offset;
          return psi * psi * m.pdf(w);
        },
        p.lo, p.hi);
  }
  return 2.0 * half;
}

double phi(const Nonlinearity& nl, const NoiseModel& m, double u) {
  if (nl.kind() == NonlinearityKind::identity) return u;  // symmetric law with finite mean
  double total = 0.0;
  auto accumulate = [&](double a, double b, double slope, double offset) {
    // int_{a-u}^{b-u} (slope (u + w) + offset) p(w) dw
    const double lo = a - u;
    const double hi = b - u;
    total += (slope * u + offset) * mass(m, lo, hi);
    if (slope != 0.0) {
      total += slope * detail::integrate([&](double w) { return w * m.pdf(w); }, lo, hi);
    }
  };
  for (const auto& p : nl.pieces()) {
    accumulate(p.lo, p.hi, p.slope, p.offset);
    accumulate(-p.hi, -p.lo, p.slope, -p.offset);
  }
  return total;
}

double phi_prime_zero_numeric(const Nonlinearity& nl, const NoiseModel& m, double h) {
  auto central = [&](double step) { return (phi(nl, m, step) - phi(nl, m, -step)) / (2.0 * step); };
  const double d1 = central(h);
  const double d2 = central(h / 2.0);
  const double d4 = central(h / 4.0);
  const double r1 = 2.0 * d2 - d1;
  const double r2 = 2.0 * d4 - d2;
  return (4.0 * r2 - r1) / 3.0;
}

double phi_prime_zero(const Nonlinearity& nl, const NoiseModel& m) {
  double slope = 0.0;
  switch (nl.kind()) {
    case NonlinearityKind::sign:
      slope = 2.0 * m.pdf(0.0);
      break;
    case NonlinearityKind::identity:
      slope = 1.0;
      break;
    default:
      slope = phi_prime_zero_numeric(nl, m);
      break;
  }
  if (!(slope > 0.0)) {
    std::ostringstream msg;
    msg << "phi'(0) = " << slope << " for " << nl.describe() << " under " << m.describe()
        << " is not positive";
    throw AssumptionViolation(msg.str());
  }
  return slope;
}

std::vector<double> symmetric_grid(double half_width, std::size_t half_count) {
  std::vector<double> pos;
  for (std::size_t k = 1; k <= half_count; ++k) {
    pos.push_back(half_width * static_cast<double>(k) / static_cast<double>(half_count));
  }
  for (double e = 1e-9; e < half_width / static_cast<double>(half_count); e *= 10.0) pos.push_back(e);
  std::sort(pos.begin(), pos.end());
  std::vector<double> grid;
  grid.reserve(2 * pos.size() + 1);
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) grid.push_back(-*it);
  grid.push_back(0.0);
  grid.insert(grid.end(), pos.begin(), pos.end());
  return grid;
}

ShapeReport validate_shape(const Nonlinearity& nl, std::span<const double> grid) {
  std::vector<double> points(grid.begin(), grid.end());
  std::sort(points.begin(), points.end());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] != -points[points.size() - 1 - i]) {
      throw ParameterError("validate_shape: grid is not symmetric about 0");
    }
  }

  ShapeReport r;
  r.odd = true;
  r.positive_on_positives = true;
  r.monotone = true;
  double grid_max = 0.0;
  double prev = -std::numeric_limits<double>::infinity();
  for (double g : points) {
    const double v = nl(g);
    grid_max = std::max(grid_max, std::abs(v));
    if (std::abs(nl(-g) + v) > 1e-12 * std::max(1.0, std::abs(v))) r.odd = false;
    if (g > 0.0 && !(v > 0.0)) r.positive_on_positives = false;
    if (v < prev) r.monotone = false;
    prev = v;
  }

  const auto c1 = nl.bound();
  r.bounded = c1.has_value() && grid_max <= *c1;
  r.c1 = c1.value_or(std::numeric_limits<double>::infinity());

  r.discontinuous_at_zero = nl.discontinuous_at_zero() && nl(1e-300) > 0.0;
  // Widest symmetric window around 0 on which consecutive grid values rise.
  double last_strict = 0.0;
  double last_value = nl(0.0);
  for (double g : points) {
    if (g <= 0.0) continue;
    const double v = nl(g);
    if (!(v > last_value)) break;
    last_strict = g;
    last_value = v;
  }
  r.strictly_increasing_near_zero = !r.discontinuous_at_zero && last_strict > 0.0;
  r.c2 = r.strictly_increasing_near_zero ? last_strict : 0.0;
  r.jump_or_slope = r.discontinuous_at_zero || r.strictly_increasing_near_zero;

  if (!r.odd) r.failures.push_back("odd: fails");
  if (!r.positive_on_positives) r.failures.push_back("positive on positives: fails");
  if (!r.monotone) r.failures.push_back("nondecreasing: fails");
  if (!r.bounded) r.failures.push_back("bounded: fails, " + nl.describe() + " is unbounded");
  if (!r.jump_or_slope) r.failures.push_back("jump at 0 or strictly increasing near 0: fails");
  return r;
}

}  // namespace nlci
