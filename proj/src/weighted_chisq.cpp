#include "simreg/weighted_chisq.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include "simreg/errors.hpp"
#include "simreg/rng.hpp"

namespace simreg {

namespace {
constexpr std::uint64_t kSampleSalt = 0x5743485153ULL;  // stream domain tag
}

WeightedChiSq::WeightedChiSq(Eigen::VectorXd weights) : xi(std::move(weights)) {
  if (xi.size() < 1) throw DataError("weighted chi-square needs d >= 1");
  if ((xi.array() <= 0).any())
    throw DataError("weighted chi-square weights must be positive");
}

Eigen::VectorXd wchisq_sample(const WeightedChiSq& dist, int b_draws,
                              std::uint64_t seed) {
  if (b_draws < 1) throw DataError("need at least one draw");
  Eigen::VectorXd out(b_draws);
  const std::uint64_t base = mix_seed(seed, kSampleSalt);
  for (int b = 0; b < b_draws; ++b) {
    Rng rng(base, static_cast<std::uint64_t>(b));
    double s = 0;
    for (int k = 0; k < dist.d(); ++k) {
      const double z = rng.next_normal();
      s += dist.xi[k] * z * z;
    }
    out[b] = s;
  }
  return out;
}

WChisqMoments wchisq_moments(const WeightedChiSq& dist) {
  const double s1 = dist.xi.sum();
  const double s2 = dist.xi.array().square().sum();
  const double s3 = dist.xi.array().cube().sum();
  return {s1, 2.0 * s2, 8.0 * s3};
}

double wchisq_tail_moment_match(const WeightedChiSq& dist, double q) {
  if (q <= 0) return 1.0;
  const double s1 = dist.xi.sum();
  const double s2 = dist.xi.array().square().sum();
  const double s3 = dist.xi.array().cube().sum();
  // Match mean, variance and skewness of a*chisq_nu + b:
  //   a = s3/s2, nu = s2^3/s3^2, b = s1 - s2^2/s3.
  const double a = s3 / s2;
  const double nu = s2 * s2 * s2 / (s3 * s3);
  const double b = s1 - s2 * s2 / s3;
  const double x = (q - b) / a;
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(nu / 2.0, x / 2.0);
}

}  // namespace simreg
