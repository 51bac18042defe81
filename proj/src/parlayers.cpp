#include "qfno/parlayers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "qfno/error.hpp"
#include "qfno/states.hpp"

namespace qfno {
namespace {

std::vector<int> greedy_layers(int n, const std::vector<std::pair<int, int>>& slots) {
  std::vector<int> busy(static_cast<std::size_t>(n), 0);
  std::vector<int> layer;
  layer.reserve(slots.size());
  for (auto [p, q] : slots) {
    const int l = std::max(busy[p], busy[q]);
    busy[p] = busy[q] = l + 1;
    layer.push_back(l);
  }
  return layer;
}

void check_theta(const Layout& layout, const ThetaVector& theta) {
  if (theta.size() != layout.slots.size()) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(layout.slots.size()) +
                                               " angles, got " + std::to_string(theta.size()));
  }
}

std::vector<Gate> slot_gates(const Layout& layout, const ThetaVector& theta, bool reversed) {
  check_theta(layout, theta);
  std::vector<Gate> gates;
  const int m = layout.slot_count();
  for (int k = 0; k < m; ++k) {
    const int s = reversed ? m - 1 - k : k;
    if (!layout.slot_active(s)) continue;
    const auto [p, q] = layout.slots[static_cast<std::size_t>(s)];
    gates.emplace_back(Rbs{Register::Top, p, q, theta[static_cast<std::size_t>(s)]});
  }
  return gates;
}

}  // namespace

Layout Layout::butterfly(int n) {
  if (!is_power_of_two(n) || n < 2) {
    throw Error(ErrorCode::NotPowerOfTwo, "butterfly needs a power-of-two qubit count >= 2");
  }
  Layout l;
  l.shape = LayoutShape::Butterfly;
  l.n = l.n_active = n;
  int stage = 0;
  for (int stride = n / 2; stride >= 1; stride /= 2, ++stage) {
    for (int start = 0; start < n; start += 2 * stride) {
      for (int i = start; i < start + stride; ++i) {
        l.slots.emplace_back(i, i + stride);
        l.slot_layer.push_back(stage);
      }
    }
  }
  return l;
}

Layout Layout::butterfly_padded(int m) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "butterfly needs at least 2 qubits");
  Layout l = butterfly(static_cast<int>(next_power_of_two(m)));
  l.n_active = m;
  return l;
}

Layout Layout::pyramid(int n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "pyramid needs at least 2 qubits");
  Layout l;
  l.shape = LayoutShape::Pyramid;
  l.n = l.n_active = n;
  for (int top = 0; top < n - 1; ++top) {
    for (int i = top; i >= 0; --i) l.slots.emplace_back(i, i + 1);
  }
  l.slot_layer = greedy_layers(n, l.slots);
  return l;
}

Layout Layout::custom(int n, std::vector<std::pair<int, int>> slots) {
  for (auto [p, q] : slots) {
    if (p < 0 || q < 0 || p >= n || q >= n || p == q) {
      throw Error(ErrorCode::IndexOutOfRange, "custom slot outside the register");
    }
  }
  Layout l;
  l.shape = LayoutShape::Custom;
  l.n = l.n_active = n;
  l.slots = std::move(slots);
  l.slot_layer = greedy_layers(n, l.slots);
  return l;
}

bool Layout::slot_active(int s) const {
  const auto [p, q] = slots[static_cast<std::size_t>(s)];
  return p < n_active && q < n_active;
}

int Layout::active_slot_count() const {
  int c = 0;
  for (int s = 0; s < slot_count(); ++s) c += slot_active(s) ? 1 : 0;
  return c;
}

int Layout::layer_count() const {
  int layers = 0;
  for (int s = 0; s < slot_count(); ++s) {
    if (slot_active(s)) layers = std::max(layers, slot_layer[static_cast<std::size_t>(s)] + 1);
  }
  return layers;
}

RMatrix GivensChain::matrix(const ThetaVector& theta) const {
  return apply(theta, RMatrix::Identity(dim_, dim_));
}

RMatrix GivensChain::apply(const ThetaVector& theta, RMatrix u) const {
  if (u.rows() != dim_) throw Error(ErrorCode::ShapeMismatch, "chain input has the wrong row count");
  for (const auto& st : steps_) {
    const double t = theta[static_cast<std::size_t>(st.param)];
    const double c = std::cos(t);
    const double s = std::sin(t);
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      const double xa = u(st.a, j);
      const double xb = u(st.b, j);
      u(st.a, j) = c * xa + s * xb;
      u(st.b, j) = -s * xa + c * xb;
    }
  }
  return u;
}

std::vector<double> GivensChain::vjp(const ThetaVector& theta, const RMatrix& u_bar) const {
  return vjp(theta, RMatrix::Identity(dim_, dim_), u_bar);
}

std::vector<double> GivensChain::vjp(const ThetaVector& theta, const RMatrix& x,
                                     const RMatrix& y_bar) const {
  if (y_bar.rows() != dim_ || y_bar.cols() != x.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "chain cotangent shape does not match its input");
  }
  std::vector<double> grad(theta.size(), 0.0);
  // Sweep backwards keeping R = (prefix product before the step) x and
  // B = (suffix product after the step)^T Y_bar.
  RMatrix r = apply(theta, x);
  RMatrix b = y_bar;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    const double t = theta[static_cast<std::size_t>(it->param)];
    const double c = std::cos(t);
    const double s = std::sin(t);
    const int ia = it->a;
    const int ib = it->b;
    double g = 0.0;
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      // Undo this step on R: inverse rotation [[c, -s], [s, c]].
      const double ra = c * r(ia, j) - s * r(ib, j);
      const double rb = s * r(ia, j) + c * r(ib, j);
      r(ia, j) = ra;
      r(ib, j) = rb;
      g += b(ia, j) * (-s * ra + c * rb) + b(ib, j) * (-c * ra - s * rb);
      // B <- G^T B.
      const double ba = b(ia, j);
      const double bb = b(ib, j);
      b(ia, j) = c * ba - s * bb;
      b(ib, j) = s * ba + c * bb;
    }
    grad[static_cast<std::size_t>(it->param)] += g;
  }
  return grad;
}

Circuit build_param_circuit(const Layout& layout, const ThetaVector& theta) {
  return Circuit(RegisterLayout{layout.n, 0}, slot_gates(layout, theta, false));
}

Circuit build_reversed(const Layout& layout, const ThetaVector& theta) {
  return Circuit(RegisterLayout{layout.n, 0}, slot_gates(layout, theta, true));
}

std::vector<int> z_index_set(const Layout& layout) {
  std::vector<int> set;
  if (layout.shape == LayoutShape::Butterfly) {
    // I_1 = {0}; I_{a+1} = I_a on the lower half and the complement of I_a,
    // shifted, on the upper half.
    std::vector<bool> in{true, false};
    while (static_cast<int>(in.size()) < layout.n) {
      const std::size_t half = in.size();
      for (std::size_t i = 0; i < half; ++i) in.push_back(!in[i]);
    }
    for (int i = 0; i < layout.n_active; ++i) {
      if (in[static_cast<std::size_t>(i)]) set.push_back(i);
    }
    return set;
  }
  if (layout.shape == LayoutShape::Pyramid) {
    for (int i = 0; i < layout.n; i += 2) set.push_back(i);
    return set;
  }
  // Custom connectivity: breadth-first 2-colouring of the slot graph.
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(layout.n));
  for (int s = 0; s < layout.slot_count(); ++s) {
    if (!layout.slot_active(s)) continue;
    const auto [p, q] = layout.slots[static_cast<std::size_t>(s)];
    adj[p].push_back(q);
    adj[q].push_back(p);
  }
  std::vector<int> colour(static_cast<std::size_t>(layout.n), -1);
  for (int root = 0; root < layout.n; ++root) {
    if (colour[root] != -1) continue;
    colour[root] = 1;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int w : adj[v]) {
        if (colour[w] == -1) {
          colour[w] = 1 - colour[v];
          queue.push_back(w);
        } else if (colour[w] == colour[v]) {
          throw Error(ErrorCode::UnsupportedLayout, "slot graph has an odd cycle; no Z-index set exists");
        }
      }
    }
  }
  for (int i = 0; i < layout.n; ++i) {
    if (colour[i] == 1) set.push_back(i);
  }
  return set;
}

Circuit build_controlled_param(const Layout& layout, const ThetaVector& theta, int control,
                               int n_bottom) {
  const auto zset = z_index_set(layout);
  const RegisterLayout pair{layout.n, n_bottom};
  std::vector<Gate> gates = slot_gates(layout, theta, false);
  gates.emplace_back(AntiControlledZ{control, zset});
  auto mirrored = slot_gates(layout, theta, true);
  gates.insert(gates.end(), mirrored.begin(), mirrored.end());
  gates.emplace_back(AntiControlledZ{control, zset});
  return Circuit(pair, std::move(gates));
}

GivensChain param_chain(const Layout& layout) {
  std::vector<GivensChain::Step> steps;
  for (int s = 0; s < layout.slot_count(); ++s) {
    if (!layout.slot_active(s)) continue;
    const auto [p, q] = layout.slots[static_cast<std::size_t>(s)];
    steps.push_back({p, q, s});
  }
  return GivensChain(layout.n, std::move(steps));
}

GivensChain unary_weight_chain(const Layout& layout) {
  auto steps = param_chain(layout).steps();
  const auto forward = steps;
  steps.insert(steps.end(), forward.rbegin(), forward.rend());
  return GivensChain(layout.n, std::move(steps));
}

GivensChain param_chain_hw2(const Layout& layout) {
  const int n = layout.n;
  std::vector<GivensChain::Step> steps;
  for (int s = 0; s < layout.slot_count(); ++s) {
    if (!layout.slot_active(s)) continue;
    const auto [p, q] = layout.slots[static_cast<std::size_t>(s)];
    for (int r = 0; r < n; ++r) {
      if (r == p || r == q) continue;
      steps.push_back({hw2_index(n, p, r), hw2_index(n, q, r), s});
    }
  }
  return GivensChain(hw2_dim(n), std::move(steps));
}

RMatrix unary_weight(const Layout& layout, const ThetaVector& theta) {
  check_theta(layout, theta);
  return unary_weight_chain(layout).matrix(theta);
}

RMatrix compound_order2(const RMatrix& w) {
  const int m = static_cast<int>(w.rows());
  if (m < 2 || w.cols() != m) throw Error(ErrorCode::ShapeMismatch, "compound needs a square matrix, m >= 2");
  const int dim = hw2_dim(m);
  RMatrix c(dim, dim);
  for (int row = 0; row < dim; ++row) {
    const auto [a, b] = hw2_pair(m, row);
    for (int col = 0; col < dim; ++col) {
      const auto [cc, d] = hw2_pair(m, col);
      c(row, col) = w(a, cc) * w(b, d) - w(a, d) * w(b, cc);
    }
  }
  return c;
}

}  // namespace qfno
