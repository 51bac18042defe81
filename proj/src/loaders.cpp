#include "qfno/loaders.hpp"

#include <cmath>

#include "qfno/error.hpp"

namespace qfno {

UnaryState load_vector(const CVector& x, bool normalize) {
  const double nrm = x.norm();
  if (normalize) {
    if (!(nrm > 0.0)) throw Error(ErrorCode::ZeroVector, "cannot load a zero vector");
    return UnaryState{x / nrm};
  }
  if (std::abs(nrm - 1.0) > 1e-8) {
    throw Error(nrm > 0.0 ? ErrorCode::NotNormalized : ErrorCode::ZeroVector,
                "input must have unit norm when normalize is off");
  }
  return UnaryState{x};
}

UnaryState load_vector(const RVector& x, bool normalize) {
  return load_vector(CVector(x.cast<Complex>()), normalize);
}

PairState load_matrix(const CMatrix& a, bool normalize) {
  const double nrm = a.norm();
  if (normalize) {
    if (!(nrm > 0.0)) throw Error(ErrorCode::ZeroMatrix, "cannot load a zero matrix");
    return PairState{a / nrm};
  }
  if (std::abs(nrm - 1.0) > 1e-8) {
    throw Error(nrm > 0.0 ? ErrorCode::NotNormalized : ErrorCode::ZeroMatrix,
                "input must have unit Frobenius norm when normalize is off");
  }
  return PairState{a};
}

PairState load_matrix(const RMatrix& a, bool normalize) {
  return load_matrix(CMatrix(a.cast<Complex>()), normalize);
}

int matrix_loader_depth(int rows, int cols) {
  return log2_exact(rows) + 2 * rows * log2_exact(cols);
}

Circuit LoaderPlan::circuit() const {
  std::vector<Gate> gates;
  for (const auto& s : steps) gates.emplace_back(Rbs{Register::Top, s.p, s.q, s.theta});
  for (int i = 0; i < static_cast<int>(leaf_phases.size()); ++i) {
    if (leaf_phases[i] != Complex{1.0, 0.0}) gates.emplace_back(Phase{Register::Top, i, leaf_phases[i]});
  }
  return Circuit(RegisterLayout{n, 0}, std::move(gates));
}

LoaderPlan loader_plan(const CVector& x) {
  const double nrm = x.norm();
  if (!(nrm > 0.0)) throw Error(ErrorCode::ZeroVector, "cannot plan a loader for a zero vector");
  const int n = static_cast<int>(next_power_of_two(std::max<Eigen::Index>(x.size(), 1)));
  CVector padded = CVector::Zero(n);
  padded.head(x.size()) = x / nrm;

  // Sub-norm of every dyadic block, computed bottom-up.
  RVector mag = padded.cwiseAbs();

  LoaderPlan plan;
  plan.n = n;
  for (int block = n; block >= 2; block /= 2) {
    const int half = block / 2;
    for (int start = 0; start < n; start += block) {
      const double left = mag.segment(start, half).norm();
      const double right = mag.segment(start + half, half).norm();
      // Rbs maps e_p -> cos e_p - sin e_q, so a negative angle puts +right on q.
      const double alpha = std::atan2(right, left);
      plan.steps.push_back(LoaderStep{start, start + half, -alpha});
    }
  }
  plan.leaf_phases.resize(static_cast<std::size_t>(n), Complex{1.0, 0.0});
  for (int i = 0; i < n; ++i) {
    const double a = std::abs(padded[i]);
    if (a > 0.0) plan.leaf_phases[static_cast<std::size_t>(i)] = padded[i] / a;
  }
  return plan;
}

LoaderPlan loader_plan(const RVector& x) { return loader_plan(CVector(x.cast<Complex>())); }

}  // namespace qfno
