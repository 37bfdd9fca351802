#include "nlci/noise.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlci/errors.hpp"

namespace nlci {

RandomStream make_stream(std::uint64_t master_seed, std::uint64_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32),
                    0x6e6c6369u};
  return RandomStream(seq);
}

double uniform_open(RandomStream& rng) noexcept {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

NoiseModel NoiseModel::heavy_tail(double beta) {
  if (!(beta > 2.0) || !std::isfinite(beta)) {
    std::ostringstream msg;
    msg << "heavy-tail density needs beta > 2 for a finite first absolute moment, got " << beta;
    throw ParameterError(msg.str());
  }
  return NoiseModel(NoiseFamily::heavy_tail, beta);
}

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    std::ostringstream msg;
    msg << "gaussian noise needs sigma > 0, got " << sigma;
    throw ParameterError(msg.str());
  }
  return NoiseModel(NoiseFamily::gaussian, sigma);
}

std::string NoiseModel::describe() const {
  std::ostringstream out;
  if (family_ == NoiseFamily::heavy_tail) {
    out << "eq3(beta=" << param_ << ")";
  } else {
    out << "gaussian(sigma=" << param_ << ")";
  }
  return out.str();
}

double NoiseModel::pdf(double w) const noexcept {
  if (family_ == NoiseFamily::heavy_tail) {
    return (param_ - 1.0) / (2.0 * std::pow(1.0 + std::abs(w), param_));
  }
  const double z = w / param_;
  return std::exp(-0.5 * z * z) / (param_ * std::sqrt(2.0 * std::numbers::pi));
}

double NoiseModel::cdf(double w) const noexcept {
  if (family_ == NoiseFamily::heavy_tail) {
    const double tail = 0.5 * std::pow(1.0 + std::abs(w), -(param_ - 1.0));
    return w >= 0.0 ? 1.0 - tail : tail;
  }
  return 0.5 * std::erfc(-w / (param_ * std::numbers::sqrt2));
}

double NoiseModel::quantile(double u) const noexcept {
  if (family_ == NoiseFamily::heavy_tail) {
    const double m = std::min(u, 1.0 - u);
    const double magnitude = std::pow(2.0 * m, -1.0 / (param_ - 1.0)) - 1.0;
    if (u > 0.5) return magnitude;
    if (u < 0.5) return -magnitude;
    return 0.0;
  }
  return -param_ * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double NoiseModel::sample(RandomStream& rng) const noexcept { return quantile(uniform_open(rng)); }

void NoiseModel::sample(RandomStream& rng, std::span<double> out) const noexcept {
  for (double& w : out) w = sample(rng);
}

std::vector<double> NoiseModel::sample_vector(RandomStream& rng, std::size_t dim) const {
  std::vector<double> out(dim);
  sample(rng, out);
  return out;
}

double NoiseModel::first_absolute_moment() const noexcept {
  if (family_ == NoiseFamily::heavy_tail) return 1.0 / (param_ - 2.0);
  return param_ * std::sqrt(2.0 / std::numbers::pi);
}

bool NoiseModel::has_finite_variance() const noexcept {
  return family_ == NoiseFamily::gaussian || param_ > 3.0;
}

double NoiseModel::variance() const noexcept {
  if (family_ == NoiseFamily::gaussian) return param_ * param_;
  if (param_ <= 3.0) return std::numeric_limits<double>::infinity();
  return 2.0 / ((param_ - 2.0) * (param_ - 3.0));
}

double NoiseModel::truncated_second_moment(double T) const noexcept {
  if (T <= 0.0) return 0.0;
  if (family_ == NoiseFamily::gaussian) {
    // 2 int_0^T w^2 phi(w) dw = sigma^2 (erf(z/sqrt2) - 2 z phi_std(z)), z = T/sigma
    const double s = param_;
    const double z = T / s;
    const double phi_std = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return s * s * (std::erf(z / std::numbers::sqrt2) - 2.0 * z * phi_std);
  }
  // (beta - 1) int_1^{1+T} (v - 1)^2 v^{-beta} dv
  const double b = param_;
  auto antiderivative = [b](double v) {
    const double t1 = b == 3.0 ? std::log(v) : std::pow(v, 3.0 - b) / (3.0 - b);
    const double t2 = -2.0 * std::pow(v, 2.0 - b) / (2.0 - b);
    const double t3 = std::pow(v, 1.0 - b) / (1.0 - b);
    return t1 + t2 + t3;
  };
  return (b - 1.0) * (antiderivative(1.0 + T) - antiderivative(1.0));
}

}  // namespace nlci
