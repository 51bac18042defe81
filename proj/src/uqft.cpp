#include "qfno/uqft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "qfno/error.hpp"
#include "qfno/fourier.hpp"

namespace qfno {
namespace {

void require_power_of_two(int n) {
  if (!is_power_of_two(n)) {
    throw Error(ErrorCode::NotPowerOfTwo, "size " + std::to_string(n) + " is not a power of two");
  }
}

const Circuit& cached_uqft(int n, bool inverse) {
  static std::mutex mutex;
  static std::map<std::pair<int, bool>, std::unique_ptr<const Circuit>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, inverse}];
  if (!slot) slot = std::make_unique<const Circuit>(build_uqft(n, inverse));
  return *slot;
}

CMatrix permute_columns(const CMatrix& a, const std::vector<int>& perm) {
  CMatrix out(a.rows(), a.cols());
  for (int i = 0; i < static_cast<int>(perm.size()); ++i) out.col(i) = a.col(perm[i]);
  return out;
}

}  // namespace

DftOracle dft_matrix(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "DFT size must be >= 1");
  DftOracle o{n, CMatrix(n, n)};
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      // Reduce the exponent first so large n keeps full accuracy.
      const long long e = (static_cast<long long>(j) * k) % n;
      o.f(j, k) = std::polar(1.0, 2.0 * kPi * static_cast<double>(e) / n);
    }
  }
  return o;
}

std::vector<int> bit_reversal_permutation(int n) {
  require_power_of_two(n);
  const int bits = log2_exact(n);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int r = 0;
    for (int b = 0; b < bits; ++b) {
      if (i & (1 << b)) r |= 1 << (bits - 1 - b);
    }
    perm[static_cast<std::size_t>(i)] = r;
  }
  return perm;
}

Circuit build_uqft(int n, bool inverse) {
  require_power_of_two(n);
  std::vector<Gate> gates;
  for (int span = 2; span <= n; span *= 2) {
    const int half = span / 2;
    for (int start = 0; start < n; start += span) {
      for (int k = 0; k < half; ++k) {
        const int p = start + k;
        const int q = p + half;
        const Complex twiddle = std::polar(1.0, 2.0 * kPi * k / span);
        gates.emplace_back(Phase{Register::Top, q, -twiddle});
        gates.emplace_back(Rbs{Register::Top, p, q, -kPi / 4});
      }
    }
  }
  Circuit forward(RegisterLayout{n, 0}, std::move(gates));
  return inverse ? forward.adjoint() : forward;
}

PairState apply_uqft_rows(const PairState& state, bool inverse, TransformPath path) {
  const int n = state.n_bottom();
  require_power_of_two(n);
  if (path == TransformPath::Semantic) return PairState{dft_rows(state.amps, inverse)};

  const auto perm = bit_reversal_permutation(n);
  const RegisterLayout layout{state.n_top(), n};
  const Circuit circuit = cached_uqft(n, inverse).on_register(Register::Bottom, layout);
  if (!inverse) {
    PairState s{permute_columns(state.amps, perm)};
    apply_circuit(s, circuit);
    return s;
  }
  PairState s = state;
  apply_circuit(s, circuit);
  return PairState{permute_columns(s.amps, perm)};
}

}  // namespace qfno
