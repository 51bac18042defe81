#include "qfno/dense.hpp"

#include <string>

#include "qfno/error.hpp"

namespace qfno {
namespace {

std::uint64_t bit(int k) { return std::uint64_t{1} << k; }

int global_qubit(Register reg, int i, const RegisterLayout& layout) {
  return reg == Register::Top ? i : layout.n_top + i;
}

}  // namespace

std::uint64_t dense_unary_index(int i) { return bit(i); }
std::uint64_t dense_pair_index(int n_top, int i, int j) { return bit(i) | bit(n_top + j); }
std::uint64_t dense_hw2_index(int p, int q) { return bit(p) | bit(q); }

CVector dense_reference_sim(const Circuit& circuit, const CVector& input) {
  const auto& layout = circuit.layout();
  const int n = layout.total();
  if (n > kDenseQubitCap) {
    throw Error(ErrorCode::QubitCapExceeded,
                std::to_string(n) + " qubits exceeds the dense cap of " + std::to_string(kDenseQubitCap));
  }
  const std::uint64_t dim = bit(n);
  if (static_cast<std::uint64_t>(input.size()) != dim) {
    throw Error(ErrorCode::LengthMismatch, "dense input length must be 2^n");
  }
  CVector psi = input;
  for (const auto& gate : circuit.gates()) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, Rbs>) {
            const Eigen::Matrix4cd u = rbs_matrix(g.theta);
            const std::uint64_t mp = bit(global_qubit(g.reg, g.p, layout));
            const std::uint64_t mq = bit(global_qubit(g.reg, g.q, layout));
            for (std::uint64_t base = 0; base < dim; ++base) {
              if ((base & mp) || (base & mq)) continue;
              // 4x4 basis |x_q x_p>: index = 2 x_q + x_p.
              const std::uint64_t idx[4] = {base, base | mp, base | mq, base | mp | mq};
              Eigen::Vector4cd v;
              for (int k = 0; k < 4; ++k) v[k] = psi[idx[k]];
              const Eigen::Vector4cd w = u * v;
              for (int k = 0; k < 4; ++k) psi[idx[k]] = w[k];
            }
          } else if constexpr (std::is_same_v<T, Phase>) {
            const std::uint64_t mp = bit(global_qubit(g.reg, g.p, layout));
            for (std::uint64_t b = 0; b < dim; ++b) {
              if (b & mp) psi[b] *= g.phi;
            }
          } else if constexpr (std::is_same_v<T, ZGate>) {
            const std::uint64_t mp = bit(global_qubit(g.reg, g.p, layout));
            for (std::uint64_t b = 0; b < dim; ++b) {
              if (b & mp) psi[b] = -psi[b];
            }
          } else {
            const std::uint64_t mc = bit(global_qubit(Register::Bottom, g.control, layout));
            for (std::uint64_t b = 0; b < dim; ++b) {
              if (b & mc) continue;
              int parity = 0;
              for (int t : g.targets) parity ^= (b & bit(t)) ? 1 : 0;
              if (parity) psi[b] = -psi[b];
            }
          }
        },
        gate);
  }
  return psi;
}

}  // namespace qfno
