#pragma once

#include <utility>

#include "qfno/circuit.hpp"
#include "qfno/types.hpp"

namespace qfno {

/// Superposition over the n unary basis states |e_i> of one register.
struct UnaryState {
  CVector amps;

  int n() const { return static_cast<int>(amps.size()); }
  double norm() const { return amps.norm(); }
};

/// Two unary registers: amps(i, j) is the coefficient of |e_i>_top |e_j>_bottom.
struct PairState {
  CMatrix amps;

  int n_top() const { return static_cast<int>(amps.rows()); }
  int n_bottom() const { return static_cast<int>(amps.cols()); }
  double norm() const { return amps.norm(); }
};

/// Hamming-weight-2 sector of an n-qubit register, pairs (p, q), p < q, in
/// lexicographic order.
struct Hw2State {
  int n = 0;
  CVector amps;

  static Hw2State zero(int n);
  double norm() const { return amps.norm(); }
};

int hw2_dim(int n);
int hw2_index(int n, int p, int q);  // order of p, q irrelevant
std::pair<int, int> hw2_pair(int n, int index);

void apply_gate(UnaryState& state, const Gate& gate);
void apply_gate(PairState& state, const Gate& gate);
void apply_gate(Hw2State& state, const Gate& gate);

void apply_circuit(UnaryState& state, const Circuit& circuit);
void apply_circuit(PairState& state, const Circuit& circuit);
void apply_circuit(Hw2State& state, const Circuit& circuit);

enum class Sector { Hw1, Hw2 };

inline constexpr int kDefaultHw2Cap = 64;

/// Matrix of a single-register circuit restricted to the given Hamming-weight
/// sector; column k is the image of basis state k.
CMatrix restricted_matrix(const Circuit& circuit, Sector sector, int hw2_cap = kDefaultHw2Cap);

}  // namespace qfno
