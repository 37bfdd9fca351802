#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace nlci {

// Per-consumer random stream. Each replicate owns one, derived from
// (master seed, replicate index) by make_stream().
using RandomStream = std::mt19937_64;

RandomStream make_stream(std::uint64_t master_seed, std::uint64_t replicate);

// Uniform draw on the open interval (0, 1) with 53 random bits.
double uniform_open(RandomStream& rng) noexcept;

enum class NoiseFamily {
  heavy_tail,  // p(w) = (beta - 1) / (2 (1 + |w|)^beta), beta > 2
  gaussian,    // N(0, sigma^2)
};

// Symmetric scalar noise density with exact pdf/cdf and inverse-transform
// sampling. Immutable.
class NoiseModel {
 public:
  // Throws ParameterError unless beta > 2 (finite first absolute moment).
  static NoiseModel heavy_tail(double beta);
  // Throws ParameterError unless sigma > 0.
  static NoiseModel gaussian(double sigma);

  NoiseFamily family() const noexcept { return family_; }
  double beta() const noexcept { return param_; }
  double sigma() const noexcept { return param_; }
  std::string describe() const;

  double pdf(double w) const noexcept;
  double cdf(double w) const noexcept;
  // Inverse cdf on (0, 1).
  double quantile(double u) const noexcept;

  double sample(RandomStream& rng) const noexcept;
  void sample(RandomStream& rng, std::span<double> out) const noexcept;
  std::vector<double> sample_vector(RandomStream& rng, std::size_t dim) const;

  // E|w|
  double first_absolute_moment() const noexcept;
  bool has_finite_variance() const noexcept;
  // +inf when the variance diverges.
  double variance() const noexcept;
  // int_{-T}^{T} w^2 p(w) dw in closed form.
  double truncated_second_moment(double T) const noexcept;

 private:
  NoiseModel(NoiseFamily family, double param) : family_(family), param_(param) {}
  NoiseFamily family_;
  double param_;
};

}  // namespace nlci
