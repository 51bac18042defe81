#include "qfno/states.hpp"

#include <cmath>
#include <string>

#include "qfno/error.hpp"

namespace qfno {
namespace {

void check_qubit(int i, int n) {
  if (i < 0 || i >= n) {
    throw Error(ErrorCode::IndexOutOfRange,
                "qubit " + std::to_string(i) + " outside register of size " + std::to_string(n));
  }
}

void require_top(Register reg) {
  if (reg != Register::Top) {
    throw Error(ErrorCode::UnsupportedGateForRegisterShape,
                "single-register state only accepts top-register gates");
  }
}

// Givens rotation on rows a, b of a column batch: (x_a, x_b) <- [[c, s], [-s, c]] (x_a, x_b).
template <typename Derived>
void rotate_rows(Eigen::MatrixBase<Derived>& m, int a, int b, double c, double s) {
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    const Complex xa = m(a, col);
    const Complex xb = m(b, col);
    m(a, col) = c * xa + s * xb;
    m(b, col) = -s * xa + c * xb;
  }
}

// Hw1 action of a single-register gate on a batch of unary states (one per column).
template <typename Derived>
void apply_hw1_rows(Eigen::MatrixBase<Derived>& m, const Gate& gate) {
  const int n = static_cast<int>(m.rows());
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Rbs>) {
          require_top(g.reg);
          check_qubit(g.p, n);
          check_qubit(g.q, n);
          rotate_rows(m, g.p, g.q, std::cos(g.theta), std::sin(g.theta));
        } else if constexpr (std::is_same_v<T, Phase>) {
          require_top(g.reg);
          check_qubit(g.p, n);
          m.row(g.p) *= g.phi;
        } else if constexpr (std::is_same_v<T, ZGate>) {
          require_top(g.reg);
          check_qubit(g.p, n);
          m.row(g.p) *= -1.0;
        } else {
          throw Error(ErrorCode::UnsupportedGateForRegisterShape,
                      "AntiControlledZ needs a two-register state");
        }
      },
      gate);
}

template <typename Derived>
void apply_hw2_rows(Eigen::MatrixBase<Derived>& m, int n, const Gate& gate) {
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Rbs>) {
          require_top(g.reg);
          check_qubit(g.p, n);
          check_qubit(g.q, n);
          const double c = std::cos(g.theta);
          const double s = std::sin(g.theta);
          // With a spectator qubit r hot, the (p, q) subsystem sees exactly the
          // unary rotation, so {p,r} plays the role of e_p and {q,r} of e_q.
          for (int r = 0; r < n; ++r) {
            if (r == g.p || r == g.q) continue;
            rotate_rows(m, hw2_index(n, g.p, r), hw2_index(n, g.q, r), c, s);
          }
        } else if constexpr (std::is_same_v<T, Phase> || std::is_same_v<T, ZGate>) {
          require_top(g.reg);
          check_qubit(g.p, n);
          Complex factor{-1.0, 0.0};
          if constexpr (std::is_same_v<T, Phase>) factor = g.phi;
          for (int r = 0; r < n; ++r) {
            if (r != g.p) m.row(hw2_index(n, g.p, r)) *= factor;
          }
        } else {
          throw Error(ErrorCode::UnsupportedGateForRegisterShape,
                      "AntiControlledZ needs a two-register state");
        }
      },
      gate);
}

}  // namespace

Hw2State Hw2State::zero(int n) {
  return Hw2State{n, CVector::Zero(hw2_dim(n))};
}

int hw2_dim(int n) { return n * (n - 1) / 2; }

int hw2_index(int n, int p, int q) {
  if (p > q) std::swap(p, q);
  if (p < 0 || q >= n || p == q) {
    throw Error(ErrorCode::IndexOutOfRange, "invalid weight-2 pair");
  }
  return p * n - p * (p + 1) / 2 + (q - p - 1);
}

std::pair<int, int> hw2_pair(int n, int index) {
  if (index < 0 || index >= hw2_dim(n)) throw Error(ErrorCode::IndexOutOfRange, "pair index");
  int p = 0;
  int row_len = n - 1;
  while (index >= row_len) {
    index -= row_len;
    ++p;
    --row_len;
  }
  return {p, p + 1 + index};
}

void apply_gate(UnaryState& state, const Gate& gate) {
  Eigen::Map<CMatrix> view(state.amps.data(), state.amps.size(), 1);
  apply_hw1_rows(view, gate);
}

void apply_gate(Hw2State& state, const Gate& gate) {
  if (state.amps.size() != hw2_dim(state.n)) {
    throw Error(ErrorCode::ShapeMismatch, "weight-2 amplitude count does not match n");
  }
  Eigen::Map<CMatrix> view(state.amps.data(), state.amps.size(), 1);
  apply_hw2_rows(view, state.n, gate);
}

void apply_gate(PairState& state, const Gate& gate) {
  auto& a = state.amps;
  const int n_top = state.n_top();
  const int n_bot = state.n_bottom();
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, AntiControlledZ>) {
          check_qubit(g.control, n_bot);
          for (int t : g.targets) check_qubit(t, n_top);
          for (int j = 0; j < n_bot; ++j) {
            if (j == g.control) continue;
            for (int t : g.targets) a(t, j) = -a(t, j);
          }
        } else if (g.reg == Register::Top) {
          apply_hw1_rows(a, gate);
        } else {
          // Bottom-register gates act on column pairs in every row.
          Eigen::Transpose<CMatrix> columns(a);
          T top_version = g;
          top_version.reg = Register::Top;
          apply_hw1_rows(columns, Gate{top_version});
        }
      },
      gate);
}

void apply_circuit(UnaryState& state, const Circuit& circuit) {
  for (const auto& g : circuit.gates()) apply_gate(state, g);
}

void apply_circuit(PairState& state, const Circuit& circuit) {
  for (const auto& g : circuit.gates()) apply_gate(state, g);
}

void apply_circuit(Hw2State& state, const Circuit& circuit) {
  for (const auto& g : circuit.gates()) apply_gate(state, g);
}

CMatrix restricted_matrix(const Circuit& circuit, Sector sector, int hw2_cap) {
  const auto& layout = circuit.layout();
  if (layout.n_bottom != 0) {
    throw Error(ErrorCode::UnsupportedGateForRegisterShape,
                "restricted_matrix expects a single-register circuit");
  }
  const int n = layout.n_top;
  if (sector == Sector::Hw1) {
    CMatrix m = CMatrix::Identity(n, n);
    for (const auto& g : circuit.gates()) apply_hw1_rows(m, g);
    return m;
  }
  if (n > hw2_cap) {
    throw Error(ErrorCode::SectorCapExceeded,
                std::to_string(n) + " qubits exceeds the weight-2 cap of " + std::to_string(hw2_cap));
  }
  const int dim = hw2_dim(n);
  CMatrix m = CMatrix::Identity(dim, dim);
  for (const auto& g : circuit.gates()) apply_hw2_rows(m, n, g);
  return m;
}

}  // namespace qfno
