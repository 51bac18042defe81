#pragma once

#include <cstdint>

#include "qfno/circuit.hpp"
#include "qfno/types.hpp"

namespace qfno {

inline constexpr int kDenseQubitCap = 12;

/// Full 2^n state-vector simulation, used as the verification oracle for the
/// subspace engines. Basis index bit k holds global qubit k: top-register
/// qubit i is bit i, bottom-register qubit j is bit n_top + j.
CVector dense_reference_sim(const Circuit& circuit, const CVector& input);

/// Basis index of |e_i>.
std::uint64_t dense_unary_index(int i);
/// Basis index of |e_i>_top |e_j>_bottom for the given top-register size.
std::uint64_t dense_pair_index(int n_top, int i, int j);
/// Basis index of the weight-2 state with qubits p and q hot.
std::uint64_t dense_hw2_index(int p, int q);

}  // namespace qfno
