#pragma once

#include <utility>
#include <vector>

#include "qfno/circuit.hpp"
#include "qfno/types.hpp"

namespace qfno {

using ThetaVector = std::vector<double>;

enum class LayoutShape { Butterfly, Pyramid, Custom };

/// Gate slots of a trainable orthogonal layer. A butterfly on n = 2^a qubits
/// has (n/2) log2(n) slots in log2(n) layers with strides n/2, n/4, ..., 1.
///
/// `n_active` < n marks a padded butterfly: slots touching a qubit >= n_active
/// are frozen at angle 0 and emitted as nothing.
struct Layout {
  LayoutShape shape = LayoutShape::Butterfly;
  int n = 0;
  int n_active = 0;
  std::vector<std::pair<int, int>> slots;
  std::vector<int> slot_layer;

  static Layout butterfly(int n);
  /// Butterfly over next_power_of_two(m) qubits with only the first m active.
  static Layout butterfly_padded(int m);
  static Layout pyramid(int n);
  static Layout custom(int n, std::vector<std::pair<int, int>> slots);

  int slot_count() const { return static_cast<int>(slots.size()); }
  bool slot_active(int s) const;
  int active_slot_count() const;
  int layer_count() const;
};

/// Chain of plane rotations on a dim-dimensional real space. Step k rotates
/// coordinates (a, b) by [[cos, sin], [-sin, cos]] with angle theta[param].
/// The same parameter may drive several steps.
class GivensChain {
 public:
  struct Step {
    int a = 0;
    int b = 0;
    int param = 0;
  };

  GivensChain(int dim, std::vector<Step> steps) : dim_(dim), steps_(std::move(steps)) {}

  int dim() const { return dim_; }
  const std::vector<Step>& steps() const { return steps_; }

  /// Product of all steps, applied in order (last step leftmost).
  RMatrix matrix(const ThetaVector& theta) const;
  /// U(theta) x without forming U; x has dim rows.
  RMatrix apply(const ThetaVector& theta, RMatrix x) const;

  /// d<U_bar, U(theta)>/d theta, accumulated per parameter index.
  std::vector<double> vjp(const ThetaVector& theta, const RMatrix& u_bar) const;
  /// d<Y_bar, U(theta) x>/d theta.
  std::vector<double> vjp(const ThetaVector& theta, const RMatrix& x, const RMatrix& y_bar) const;

 private:
  int dim_;
  std::vector<Step> steps_;
};

/// RBS gates in slot order; throws LengthMismatch unless theta has one entry per slot.
Circuit build_param_circuit(const Layout& layout, const ThetaVector& theta);

/// Same gates in reversed slot order with the same angles. Equals P^dagger(-theta).
Circuit build_reversed(const Layout& layout, const ThetaVector& theta);

/// Qubits such that every active slot has exactly one endpoint in the set.
/// Butterfly: recursive doubling; pyramid: even indices; custom layouts are
/// 2-coloured and rejected with UnsupportedLayout when that is impossible.
std::vector<int> z_index_set(const Layout& layout);

/// P, CU_Z, P', CU_Z on a (layout.n, n_bottom) pair layout, with the
/// anti-controlled Z gates keyed on bottom qubit `control`. Column `control`
/// of a pair state is mapped by unary_weight(); all other columns are fixed.
Circuit build_controlled_param(const Layout& layout, const ThetaVector& theta, int control,
                               int n_bottom);

/// Unary restriction of P'(theta) P(theta) as a Givens chain over layout.n coordinates.
GivensChain unary_weight_chain(const Layout& layout);
/// Unary restriction of P(theta) alone.
GivensChain param_chain(const Layout& layout);
/// Weight-2 restriction of P(theta), over hw2_dim(layout.n) coordinates.
GivensChain param_chain_hw2(const Layout& layout);

RMatrix unary_weight(const Layout& layout, const ThetaVector& theta);

/// All 2x2 minors: entry ((a,b),(c,d)) = W_ac W_bd - W_ad W_bc, pairs in
/// lexicographic order.
RMatrix compound_order2(const RMatrix& w);

/// Angles drawn independently from U(-pi/sqrt(n), pi/sqrt(n)); frozen slots stay 0.
template <typename Rng>
ThetaVector init_theta(const Layout& layout, Rng& rng);

}  // namespace qfno

#include <cmath>
#include <random>

namespace qfno {

template <typename Rng>
ThetaVector init_theta(const Layout& layout, Rng& rng) {
  const double bound = kPi / std::sqrt(static_cast<double>(layout.n_active));
  std::uniform_real_distribution<double> dist(-bound, bound);
  ThetaVector theta(layout.slots.size(), 0.0);
  for (int s = 0; s < layout.slot_count(); ++s) {
    const double v = dist(rng);
    if (layout.slot_active(s)) theta[static_cast<std::size_t>(s)] = v;
  }
  return theta;
}

}  // namespace qfno
