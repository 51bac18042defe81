#pragma once

#include <variant>
#include <vector>

#include "qfno/types.hpp"

namespace qfno {

/// Which register of a two-register layout a gate acts on. Single-register
/// circuits use Register::Top throughout.
enum class Register { Top, Bottom };

/// Reconfigurable beam splitter on the ordered qubit pair (p, q), p != q.
/// On the unary pair (e_p, e_q) it acts as [[cos, sin], [-sin, cos]].
struct Rbs {
  Register reg = Register::Top;
  int p = 0;
  int q = 1;
  double theta = 0.0;
};

/// diag(1, phi) on qubit p; |phi| = 1.
struct Phase {
  Register reg = Register::Top;
  int p = 0;
  Complex phi{1.0, 0.0};
};

struct ZGate {
  Register reg = Register::Top;
  int p = 0;
};

/// Z on every top-register target, applied when the bottom-register control
/// qubit is |0>. Acts as one unit; its schedule duration is |targets|.
struct AntiControlledZ {
  int control = 0;
  std::vector<int> targets;
};

using Gate = std::variant<Rbs, Phase, ZGate, AntiControlledZ>;

struct RegisterLayout {
  int n_top = 0;
  int n_bottom = 0;  // 0 for single-register circuits

  int total() const { return n_top + n_bottom; }
  bool operator==(const RegisterLayout&) const = default;
};

/// Per-gate parallel-layer assignment produced by greedy as-soon-as-possible
/// scheduling over disjoint qubit supports.
struct Schedule {
  std::vector<int> start_layer;  // one per gate
  std::vector<int> duration;     // one per gate
  int depth = 0;
};

/// An ordered, validated sequence of Hamming-weight-preserving gates.
/// Immutable once constructed.
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(RegisterLayout layout, std::vector<Gate> gates = {});

  const RegisterLayout& layout() const { return layout_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  /// This circuit followed by `next` (same layout).
  Circuit then(const Circuit& next) const;

  /// Copy with every gate retagged to `reg`, for placing a single-register
  /// circuit on one register of a pair layout.
  Circuit on_register(Register reg, RegisterLayout layout) const;

  /// Gate-for-gate adjoint: reversed order, negated angles, conjugated phases.
  Circuit adjoint() const;

  Schedule schedule() const;
  int depth() const { return schedule().depth; }

  /// Number of elementary gates; an AntiControlledZ counts one per target.
  std::size_t elementary_gate_count() const;

 private:
  RegisterLayout layout_;
  std::vector<Gate> gates_;
};

/// Global qubit indices touched by a gate (top register first, then bottom).
std::vector<int> gate_support(const Gate& gate, const RegisterLayout& layout);

/// Throws IndexOutOfRange / InvalidArgument if the gate does not fit the layout.
void validate_gate(const Gate& gate, const RegisterLayout& layout);

/// 4x4 RBS unitary in basis |00>,|01>,|10>,|11>. For Rbs{p, q}, the second
/// basis bit is qubit p and the first is qubit q, so |01> = e_p, |10> = e_q.
Eigen::Matrix4cd rbs_matrix(double theta);

}  // namespace qfno
