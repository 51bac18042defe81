#pragma once

#include <cstdint>

#include "qfno/states.hpp"

namespace qfno {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Samples `shots` outcomes (i, j) with probability |a_ij|^2. Deterministic
/// for a fixed seed. Throws NotNormalized unless the state has unit norm.
CountMatrix measure_sample(const PairState& state, std::int64_t shots, std::uint64_t seed);

/// Magnitude estimates sqrt(count / shots); signs and phases are not recoverable.
RMatrix amp_estimates(const CountMatrix& counts);

}  // namespace qfno
