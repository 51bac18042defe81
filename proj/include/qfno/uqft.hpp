#pragma once

#include <vector>

#include "qfno/circuit.hpp"
#include "qfno/states.hpp"

namespace qfno {

/// Classical DFT matrix F_n with entries omega^{jk}, omega = exp(i 2 pi / n).
struct DftOracle {
  int n = 0;
  CMatrix f;
};

DftOracle dft_matrix(int n);

/// Input permutation for the unary QFT: feeding x[perm[i]] into qubit i makes
/// the circuit realise F_n / sqrt(n) on x. For radix-2 it is bit reversal.
std::vector<int> bit_reversal_permutation(int n);

/// Unary QFT on n = 2^a qubits: log2(n) stages of radix-2 sites, each a
/// Phase(q, -omega^k) followed by Rbs(p, q, -pi/4). inverse = true returns
/// the adjoint circuit.
Circuit build_uqft(int n, bool inverse = false);

enum class TransformPath { Semantic, Gate };

/// Replaces every row of the amplitude matrix by its unitary (inverse) DFT.
/// The gate path runs the unary QFT circuit on the bottom register and
/// handles the input/output permutation around it.
PairState apply_uqft_rows(const PairState& state, bool inverse, TransformPath path);

}  // namespace qfno
