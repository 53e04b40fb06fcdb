#ifndef SIMREG_WEIGHTED_CHISQ_HPP
#define SIMREG_WEIGHTED_CHISQ_HPP

#include <Eigen/Dense>
#include <cstdint>

namespace simreg {

// Mixture sum_k xi_k * chisq_1, the null law of the score statistic.
struct WeightedChiSq {
  Eigen::VectorXd xi;  // strictly positive, d >= 1

  explicit WeightedChiSq(Eigen::VectorXd weights);
  int d() const { return static_cast<int>(xi.size()); }
};

// B iid draws; the stream for draw b depends only on (seed, b), so any
// partitioning across workers reproduces the same values.
Eigen::VectorXd wchisq_sample(const WeightedChiSq& dist, int b_draws,
                              std::uint64_t seed);

struct WChisqMoments {
  double mean;           // sum(xi)
  double variance;       // 2 sum(xi^2)
  double third_central;  // 8 sum(xi^3)
};

WChisqMoments wchisq_moments(const WeightedChiSq& dist);

// Upper tail P(X > q) from the Pearson three-moment match to a shifted,
// scaled chi-square; exact when d == 1.
double wchisq_tail_moment_match(const WeightedChiSq& dist, double q);

}  // namespace simreg

#endif
