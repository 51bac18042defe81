#include "qfno/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfno/error.hpp"

namespace qfno {
namespace {

int register_size(Register reg, const RegisterLayout& layout) {
  return reg == Register::Top ? layout.n_top : layout.n_bottom;
}

int global_index(Register reg, int i, const RegisterLayout& layout) {
  return reg == Register::Top ? i : layout.n_top + i;
}

void check_index(Register reg, int i, const RegisterLayout& layout) {
  const int n = register_size(reg, layout);
  if (i < 0 || i >= n) {
    throw Error(ErrorCode::IndexOutOfRange,
                "qubit " + std::to_string(i) + " outside register of size " + std::to_string(n));
  }
}

}  // namespace

void validate_gate(const Gate& gate, const RegisterLayout& layout) {
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Rbs>) {
          check_index(g.reg, g.p, layout);
          check_index(g.reg, g.q, layout);
          if (g.p == g.q) throw Error(ErrorCode::InvalidArgument, "RBS needs two distinct qubits");
          if (!std::isfinite(g.theta)) throw Error(ErrorCode::InvalidArgument, "RBS angle not finite");
        } else if constexpr (std::is_same_v<T, Phase>) {
          check_index(g.reg, g.p, layout);
          if (std::abs(std::abs(g.phi) - 1.0) > 1e-12) {
            throw Error(ErrorCode::InvalidArgument, "phase must have unit modulus");
          }
        } else if constexpr (std::is_same_v<T, ZGate>) {
          check_index(g.reg, g.p, layout);
        } else {
          check_index(Register::Bottom, g.control, layout);
          for (int t : g.targets) check_index(Register::Top, t, layout);
        }
      },
      gate);
}

std::vector<int> gate_support(const Gate& gate, const RegisterLayout& layout) {
  return std::visit(
      [&](const auto& g) -> std::vector<int> {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Rbs>) {
          return {global_index(g.reg, g.p, layout), global_index(g.reg, g.q, layout)};
        } else if constexpr (std::is_same_v<T, AntiControlledZ>) {
          std::vector<int> s{global_index(Register::Bottom, g.control, layout)};
          for (int t : g.targets) s.push_back(t);
          return s;
        } else {
          return {global_index(g.reg, g.p, layout)};
        }
      },
      gate);
}

Circuit::Circuit(RegisterLayout layout, std::vector<Gate> gates)
    : layout_(layout), gates_(std::move(gates)) {
  for (const auto& g : gates_) validate_gate(g, layout_);
}

Circuit Circuit::then(const Circuit& next) const {
  if (!(next.layout_ == layout_)) {
    throw Error(ErrorCode::ShapeMismatch, "cannot concatenate circuits with different layouts");
  }
  std::vector<Gate> all = gates_;
  all.insert(all.end(), next.gates_.begin(), next.gates_.end());
  return Circuit(layout_, std::move(all));
}

Circuit Circuit::on_register(Register reg, RegisterLayout layout) const {
  std::vector<Gate> out;
  out.reserve(gates_.size());
  for (const auto& gate : gates_) {
    out.push_back(std::visit(
        [&](auto g) -> Gate {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, AntiControlledZ>) {
            throw Error(ErrorCode::UnsupportedGateForRegisterShape,
                        "AntiControlledZ spans both registers and cannot be retargeted");
          } else {
            g.reg = reg;
            return g;
          }
        },
        gate));
  }
  return Circuit(layout, std::move(out));
}

Circuit Circuit::adjoint() const {
  std::vector<Gate> out;
  out.reserve(gates_.size());
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
    out.push_back(std::visit(
        [](auto g) -> Gate {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, Rbs>) {
            g.theta = -g.theta;
          } else if constexpr (std::is_same_v<T, Phase>) {
            g.phi = std::conj(g.phi);
          }
          return g;
        },
        *it));
  }
  return Circuit(layout_, std::move(out));
}

Schedule Circuit::schedule() const {
  Schedule s;
  std::vector<int> busy_until(static_cast<std::size_t>(layout_.total()), 0);
  s.start_layer.reserve(gates_.size());
  s.duration.reserve(gates_.size());
  for (const auto& gate : gates_) {
    const auto support = gate_support(gate, layout_);
    int duration = 1;
    if (const auto* acz = std::get_if<AntiControlledZ>(&gate)) {
      duration = std::max<int>(1, static_cast<int>(acz->targets.size()));
    }
    int start = 0;
    for (int q : support) start = std::max(start, busy_until[q]);
    for (int q : support) busy_until[q] = start + duration;
    s.start_layer.push_back(start);
    s.duration.push_back(duration);
    s.depth = std::max(s.depth, start + duration);
  }
  return s;
}

std::size_t Circuit::elementary_gate_count() const {
  std::size_t count = 0;
  for (const auto& gate : gates_) {
    if (const auto* acz = std::get_if<AntiControlledZ>(&gate)) {
      count += acz->targets.size();
    } else {
      ++count;
    }
  }
  return count;
}

Eigen::Matrix4cd rbs_matrix(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = c;
  m(1, 2) = s;
  m(2, 1) = -s;
  m(2, 2) = c;
  m(3, 3) = 1.0;
  return m;
}

}  // namespace qfno
