#include "qfno/measure.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "qfno/error.hpp"

namespace qfno {

CountMatrix measure_sample(const PairState& state, std::int64_t shots, std::uint64_t seed) {
  if (shots < 1) throw Error(ErrorCode::InvalidArgument, "shots must be >= 1");
  if (std::abs(state.norm() - 1.0) > 1e-10) {
    throw Error(ErrorCode::NotNormalized, "measurement requires a unit-norm state");
  }
  const auto rows = state.amps.rows();
  const auto cols = state.amps.cols();
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(rows * cols));
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) probs.push_back(std::norm(state.amps(i, j)));
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
  CountMatrix counts = CountMatrix::Zero(rows, cols);
  for (std::int64_t s = 0; s < shots; ++s) {
    const std::size_t k = dist(rng);
    counts(static_cast<Eigen::Index>(k) % rows, static_cast<Eigen::Index>(k) / rows) += 1;
  }
  return counts;
}

RMatrix amp_estimates(const CountMatrix& counts) {
  const double total = static_cast<double>(counts.sum());
  if (total <= 0) throw Error(ErrorCode::InvalidArgument, "no shots recorded");
  return counts.cast<double>().unaryExpr([total](double c) { return std::sqrt(c / total); });
}

}  // namespace qfno
