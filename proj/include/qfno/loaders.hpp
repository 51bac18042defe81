#pragma once

#include <vector>

#include "qfno/circuit.hpp"
#include "qfno/states.hpp"

namespace qfno {

/// Unary amplitude encoding x / ||x||. With normalize = false the input must
/// already have unit norm (to 1e-8) and is taken as is.
UnaryState load_vector(const CVector& x, bool normalize = true);
UnaryState load_vector(const RVector& x, bool normalize = true);

/// Amplitude encoding of a matrix over two unary registers, rows on top.
PairState load_matrix(const CMatrix& a, bool normalize = true);
PairState load_matrix(const RMatrix& a, bool normalize = true);

/// Depth estimate of the controlled-row matrix loader for an rows x cols
/// matrix: log(rows) + 2 rows log(cols) (logs rounded up, base 2).
int matrix_loader_depth(int rows, int cols);

struct LoaderStep {
  int p = 0;  // qubit holding the parent sub-norm
  int q = 0;  // first qubit of the right child block
  double theta = 0.0;
};

/// Binary-tree unary loader: replaying `steps` then `leaf_phases` on |e_0>
/// yields the (zero-padded) source vector.
struct LoaderPlan {
  int n = 0;                       // padded length, a power of two
  std::vector<LoaderStep> steps;   // tree order: level by level
  std::vector<Complex> leaf_phases;  // per leaf; +-1 for real inputs

  Circuit circuit() const;
};

/// Throws ZeroVector on a zero input. Non-unit inputs are normalised first.
LoaderPlan loader_plan(const CVector& x);
LoaderPlan loader_plan(const RVector& x);

}  // namespace qfno
