#include "qfno/qfl.hpp"

#include <cmath>
#include <string>

#include "qfno/error.hpp"
#include "qfno/fourier.hpp"
#include "qfno/loaders.hpp"
#include "qfno/states.hpp"

namespace qfno {
namespace {

constexpr double kNormTolerance = 1e-8;

void require_unit_norm(const CMatrix& a) {
  if (std::abs(a.norm() - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::NotNormalized, "layer input must have unit Frobenius norm, got " +
                                              std::to_string(a.norm()));
  }
}

void require_shape(const CMatrix& a, const QflConfig& config) {
  if (a.rows() != config.n_c || a.cols() != config.n_s) {
    throw Error(ErrorCode::ShapeMismatch, "layer input must be " + std::to_string(config.n_c) + "x" +
                                              std::to_string(config.n_s));
  }
}

RMatrix block_diagonal(const std::vector<RMatrix>& blocks) {
  const Eigen::Index n = blocks.empty() ? 0 : blocks.front().rows();
  const Eigen::Index k = static_cast<Eigen::Index>(blocks.size());
  RMatrix out = RMatrix::Zero(n * k, n * k);
  for (Eigen::Index j = 0; j < k; ++j) out.block(j * n, j * n, n, n) = blocks[static_cast<std::size_t>(j)];
  return out;
}

std::vector<RMatrix> mode_weights(const QflConfig& config, const QflParams& params) {
  const Layout layout = qfl_layout(config);
  std::vector<RMatrix> w;
  for (const auto& theta : params.thetas) w.push_back(unary_weight(layout, theta));
  return w;
}

// Columns of the identity on the weight-2 sector picking the cross pairs
// (top i, bottom j), ordered like vec(A[:, :K]).
RMatrix cross_pair_basis(const QflConfig& config, int n) {
  const int dim = hw2_dim(n);
  RMatrix x = RMatrix::Zero(dim, config.n_c * config.k);
  for (int j = 0; j < config.k; ++j)
    for (int i = 0; i < config.n_c; ++i) x(hw2_index(n, i, config.n_c + j), i + config.n_c * j) = 1.0;
  return x;
}

std::vector<Gate> shifted(const Circuit& c, int offset) {
  std::vector<Gate> out;
  for (Gate g : c.gates()) {
    std::visit([&](auto& x) {
      using T = std::decay_t<decltype(x)>;
      if constexpr (std::is_same_v<T, Rbs>) {
        x.p += offset;
        x.q += offset;
      } else if constexpr (!std::is_same_v<T, AntiControlledZ>) {
        x.p += offset;
      }
    }, g);
    out.push_back(g);
  }
  return out;
}

PairState load_and_transform(const CMatrix& a) {
  return apply_uqft_rows(load_matrix(a, false), false, TransformPath::Gate);
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Classical: return "classical";
    case Variant::Sequential: return "sequential";
    case Variant::Parallel: return "parallel";
    case Variant::Composite: return "composite";
  }
  return "?";
}

std::string_view to_string(ModePolicy p) { return p == ModePolicy::Keep ? "keep" : "crop"; }

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::Linear: return "linear";
    case Aggregation::Spectral: return "spectral";
    case Aggregation::Mean: return "mean";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  for (auto v : {Variant::Classical, Variant::Sequential, Variant::Parallel, Variant::Composite})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(s) + "'");
}

ModePolicy parse_mode_policy(std::string_view s) {
  for (auto p : {ModePolicy::Keep, ModePolicy::Crop})
    if (to_string(p) == s) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown mode policy '" + std::string(s) + "'");
}

Aggregation parse_aggregation(std::string_view s) {
  for (auto a : {Aggregation::Linear, Aggregation::Spectral, Aggregation::Mean})
    if (to_string(a) == s) return a;
  throw Error(ErrorCode::InvalidArgument, "unknown aggregation '" + std::string(s) + "'");
}

void QflConfig::validate() const {
  if (n_c < 2) throw Error(ErrorCode::InvalidArgument, "N_c must be at least 2");
  if (!is_power_of_two(n_s)) throw Error(ErrorCode::NotPowerOfTwo, "N_s must be a power of two");
  if (k < 1 || k > n_s) throw Error(ErrorCode::InvalidArgument, "K must satisfy 1 <= K <= N_s");
  if ((variant == Variant::Sequential || variant == Variant::Parallel) && !is_power_of_two(n_c)) {
    throw Error(ErrorCode::NotPowerOfTwo, "butterfly layers need N_c to be a power of two");
  }
}

QflParams QflParams::zero_like(const QflConfig& config) {
  config.validate();
  QflParams p;
  if (config.variant == Variant::Classical) {
    p.weights.assign(static_cast<std::size_t>(config.k), RMatrix::Zero(config.n_c, config.n_c));
    return p;
  }
  const int count = config.variant == Variant::Composite ? 1 : config.k;
  p.thetas.assign(static_cast<std::size_t>(count),
                  ThetaVector(static_cast<std::size_t>(qfl_layout(config).slot_count()), 0.0));
  return p;
}

QflParams QflParams::identity(const QflConfig& config) {
  QflParams p = zero_like(config);
  for (auto& w : p.weights) w.setIdentity();
  return p;
}

void QflParams::check(const QflConfig& config) const {
  if (config.variant == Variant::Classical) {
    bool ok = thetas.empty() && weights.size() == static_cast<std::size_t>(config.k);
    for (const auto& w : weights) ok = ok && w.rows() == config.n_c && w.cols() == config.n_c;
    if (!ok) throw Error(ErrorCode::ShapeMismatch, "classical layer needs K weight matrices of N_c x N_c");
    return;
  }
  const std::size_t count = config.variant == Variant::Composite ? 1 : static_cast<std::size_t>(config.k);
  const std::size_t slots = static_cast<std::size_t>(qfl_layout(config).slot_count());
  bool ok = weights.empty() && thetas.size() == count;
  for (const auto& t : thetas) ok = ok && t.size() == slots;
  if (!ok) throw Error(ErrorCode::ShapeMismatch, "angle vectors do not match the layer layout");
}

std::size_t QflParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  for (const auto& t : thetas) n += t.size();
  return n;
}

Layout qfl_layout(const QflConfig& config) {
  if (config.variant == Variant::Composite) return Layout::butterfly_padded(config.n_c + config.k);
  return Layout::butterfly(config.n_c);
}

CMatrix SpectralOp::apply_modes(const CMatrix& a_hat) const {
  CMatrix out = a_hat;
  const Eigen::Index m = static_cast<Eigen::Index>(n_c) * k;
  Eigen::Map<const CVector> v(a_hat.data(), m);
  const RVector vr = v.real();
  const RVector vi = v.imag();
  const RVector re = low * vr;
  const RVector im = low * vi;
  Eigen::Map<CVector> dst(out.data(), m);
  for (Eigen::Index i = 0; i < m; ++i) dst[i] = Complex{re[i], im[i]};
  const Eigen::Index rest = a_hat.cols() - k;
  if (high == High::Zero) {
    out.rightCols(rest).setZero();
  } else if (high == High::Matrix) {
    out.rightCols(rest) = high_matrix.cast<Complex>() * a_hat.rightCols(rest);
  }
  return out;
}

SpectralOp spectral_op(const QflConfig& config, const QflParams& params) {
  config.validate();
  params.check(config);
  SpectralOp op;
  op.n_c = config.n_c;
  op.k = config.k;
  switch (config.variant) {
    case Variant::Classical:
      op.low = block_diagonal(params.weights);
      op.high = config.policy == ModePolicy::Keep ? SpectralOp::High::Keep : SpectralOp::High::Zero;
      break;
    case Variant::Sequential:
      op.low = block_diagonal(mode_weights(config, params));
      break;
    case Variant::Parallel: {
      auto w = mode_weights(config, params);
      if (config.aggregation == Aggregation::Mean) {
        // Averaging the K outputs: mode k sees W_k once and the identity K-1 times.
        const double kk = config.k;
        for (auto& m : w) m = (m + (kk - 1.0) * RMatrix::Identity(config.n_c, config.n_c)) / kk;
      }
      op.low = block_diagonal(w);
      break;
    }
    case Variant::Composite: {
      const Layout layout = qfl_layout(config);
      const ThetaVector& theta = params.thetas.front();
      const RMatrix w1 = param_chain(layout).matrix(theta);
      const RMatrix x = cross_pair_basis(config, layout.n);
      const RMatrix y = param_chain_hw2(layout).apply(theta, x);
      // Post-selection keeps only the cross-pair rows.
      op.low = x.transpose() * y;
      op.high = SpectralOp::High::Matrix;
      op.high_matrix = w1.topLeftCorner(config.n_c, config.n_c);
      break;
    }
  }
  return op;
}

CMatrix apply_spectral(const SpectralOp& op, const CMatrix& a) {
  if (a.rows() != op.n_c || a.cols() < op.k) throw Error(ErrorCode::ShapeMismatch, "input does not fit the layer");
  return dft_rows(op.apply_modes(dft_rows(a)), true);
}

QflParams spectral_op_vjp(const QflConfig& config, const QflParams& params, const RMatrix& low_bar,
                          const RMatrix& high_bar) {
  params.check(config);
  const int n = config.n_c;
  QflParams g = QflParams::zero_like(config);
  switch (config.variant) {
    case Variant::Classical:
      for (int j = 0; j < config.k; ++j) g.weights[static_cast<std::size_t>(j)] = low_bar.block(j * n, j * n, n, n);
      break;
    case Variant::Sequential:
    case Variant::Parallel: {
      const double scale =
          config.variant == Variant::Parallel && config.aggregation == Aggregation::Mean ? 1.0 / config.k : 1.0;
      const GivensChain chain = unary_weight_chain(qfl_layout(config));
      for (int j = 0; j < config.k; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        g.thetas[idx] = chain.vjp(params.thetas[idx], RMatrix(scale * low_bar.block(j * n, j * n, n, n)));
      }
      break;
    }
    case Variant::Composite: {
      const Layout layout = qfl_layout(config);
      const ThetaVector& theta = params.thetas.front();
      const RMatrix x = cross_pair_basis(config, layout.n);
      auto g2 = param_chain_hw2(layout).vjp(theta, x, RMatrix(x * low_bar));
      const RMatrix e = RMatrix::Identity(layout.n, n);
      RMatrix y1_bar = RMatrix::Zero(layout.n, n);
      y1_bar.topRows(n) = high_bar;
      const auto g1 = param_chain(layout).vjp(theta, e, y1_bar);
      for (std::size_t s = 0; s < g2.size(); ++s) g2[s] += g1[s];
      g.thetas.front() = std::move(g2);
      break;
    }
  }
  return g;
}

CMatrix classical_fourier_layer(const CMatrix& a, const std::vector<RMatrix>& weights, int k,
                                ModePolicy policy) {
  const int n_c = static_cast<int>(a.rows());
  if (k < 1 || k > a.cols() || weights.size() != static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::ShapeMismatch, "need 1 <= K <= N_s and K weight matrices");
  }
  for (const auto& w : weights) {
    if (w.rows() != n_c || w.cols() != n_c) throw Error(ErrorCode::ShapeMismatch, "weights must be N_c x N_c");
  }
  SpectralOp op;
  op.n_c = n_c;
  op.k = k;
  op.low = block_diagonal(weights);
  op.high = policy == ModePolicy::Keep ? SpectralOp::High::Keep : SpectralOp::High::Zero;
  return apply_spectral(op, a);
}

CMatrix sequential_qfl(const CMatrix& a, const QflParams& params, const QflConfig& config,
                       TransformPath path) {
  QflConfig c = config;
  c.variant = Variant::Sequential;
  c.validate();
  require_shape(a, c);
  require_unit_norm(a);
  params.check(c);
  if (path == TransformPath::Semantic) return apply_spectral(spectral_op(c, params), a);

  const Layout layout = qfl_layout(c);
  PairState s = load_and_transform(a);
  for (int j = 0; j < c.k; ++j) {
    apply_circuit(s, build_controlled_param(layout, params.thetas[static_cast<std::size_t>(j)], j, c.n_s));
  }
  return apply_uqft_rows(s, true, TransformPath::Gate).amps;
}

std::vector<CMatrix> parallel_pre_iqft(const CMatrix& a, const QflParams& params, const QflConfig& config,
                                       TransformPath path) {
  QflConfig c = config;
  c.variant = Variant::Parallel;
  c.validate();
  require_shape(a, c);
  require_unit_norm(a);
  params.check(c);
  const Layout layout = qfl_layout(c);
  std::vector<CMatrix> out;
  if (path == TransformPath::Semantic) {
    const CMatrix a_hat = dft_rows(a);
    for (int j = 0; j < c.k; ++j) {
      CMatrix s = a_hat;
      s.col(j) = unary_weight(layout, params.thetas[static_cast<std::size_t>(j)]).cast<Complex>() * a_hat.col(j);
      out.push_back(std::move(s));
    }
    return out;
  }
  const PairState loaded = load_and_transform(a);
  for (int j = 0; j < c.k; ++j) {
    PairState s = loaded;
    apply_circuit(s, build_controlled_param(layout, params.thetas[static_cast<std::size_t>(j)], j, c.n_s));
    out.push_back(std::move(s.amps));
  }
  return out;
}

std::vector<CMatrix> parallel_qfl(const CMatrix& a, const QflParams& params, const QflConfig& config,
                                  TransformPath path) {
  auto spectra = parallel_pre_iqft(a, params, config, path);
  for (auto& s : spectra) {
    s = path == TransformPath::Semantic ? dft_rows(s, true) : apply_uqft_rows(PairState{s}, true, path).amps;
  }
  return spectra;
}

CMatrix recombine_linear(const std::vector<CMatrix>& outputs, const CMatrix& a) {
  if (outputs.empty()) throw Error(ErrorCode::ShapeMismatch, "nothing to recombine");
  CMatrix y = -static_cast<double>(outputs.size() - 1) * a;
  for (const auto& o : outputs) {
    if (o.rows() != a.rows() || o.cols() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "output shape differs from input");
    y += o;
  }
  return y;
}

CMatrix recombine_spectral(const std::vector<CMatrix>& spectra, int k) {
  if (spectra.size() != static_cast<std::size_t>(k) || k < 1) {
    throw Error(ErrorCode::ShapeMismatch, "need exactly K spectra");
  }
  CMatrix y = spectra.front();
  for (int j = 0; j < k; ++j) {
    const auto& s = spectra[static_cast<std::size_t>(j)];
    if (s.rows() != y.rows() || s.cols() != y.cols() || y.cols() < k) {
      throw Error(ErrorCode::ShapeMismatch, "spectra shapes differ");
    }
    y.col(j) = s.col(j);
  }
  return dft_rows(y, true);
}

CMatrix recombine_mean(const std::vector<CMatrix>& outputs) {
  if (outputs.empty()) throw Error(ErrorCode::ShapeMismatch, "nothing to recombine");
  CMatrix y = CMatrix::Zero(outputs.front().rows(), outputs.front().cols());
  for (const auto& o : outputs) {
    if (o.rows() != y.rows() || o.cols() != y.cols()) throw Error(ErrorCode::ShapeMismatch, "output shapes differ");
    y += o;
  }
  return y / static_cast<double>(outputs.size());
}

CMatrix composite_qfl(const CMatrix& a, const QflParams& params, const QflConfig& config) {
  QflConfig c = config;
  c.variant = Variant::Composite;
  c.validate();
  require_shape(a, c);
  require_unit_norm(a);
  CMatrix y = apply_spectral(spectral_op(c, params), a);
  if (c.renormalize_postselected) {
    const double norm = y.norm();
    if (norm == 0.0) throw Error(ErrorCode::ZeroMatrix, "post-selection removed the whole state");
    y /= norm;
  }
  return y;
}

Circuit composite_param_circuit(const QflConfig& config, const ThetaVector& theta) {
  QflConfig c = config;
  c.variant = Variant::Composite;
  c.validate();
  const Layout layout = qfl_layout(c);
  // Frozen slots emit no gates, so the circuit never touches padding qubits.
  const Circuit full = build_param_circuit(layout, theta);
  return Circuit(RegisterLayout{c.n_c + c.k, 0}, full.gates());
}

CMatrix apply_layer(const CMatrix& a, const QflParams& params, const QflConfig& config) {
  if (config.variant == Variant::Composite) return composite_qfl(a, params, config);
  require_shape(a, config);
  return apply_spectral(spectral_op(config, params), a);
}

double formula_depth(const QflConfig& config) {
  const double nc = config.n_c;
  const double ls = std::log2(static_cast<double>(config.n_s));
  const double lc = std::log2(nc);
  const double k = config.k;
  switch (config.variant) {
    case Variant::Classical: return nc + config.n_s * ls;
    case Variant::Sequential: return (nc + 2) * ls + (2 * k + 1) * lc + k * nc;
    case Variant::Parallel: return (nc + 2) * ls + 3 * lc + nc;
    case Variant::Composite: return std::log2(nc + k) + lc + (nc + 2) * ls;
  }
  return 0.0;
}

std::int64_t param_count(const QflConfig& config) {
  config.validate();
  const std::int64_t nc = config.n_c;
  const std::int64_t k = config.k;
  switch (config.variant) {
    case Variant::Classical: return k * nc * nc;
    case Variant::Sequential:
    case Variant::Parallel: return k * (nc / 2) * log2_exact(nc);
    case Variant::Composite: return qfl_layout(config).active_slot_count();
  }
  return 0;
}

ComplexityReport complexity_report(const QflConfig& config) {
  config.validate();
  ComplexityReport r;
  r.variant = config.variant;
  r.qubits = config.n_c + config.n_s;
  r.circuit_count = config.variant == Variant::Parallel ? config.k : 1;
  r.formula_depth = formula_depth(config);
  r.param_count = param_count(config);
  if (config.variant == Variant::Classical) return r;

  // The matrix loader is a tree of controlled RBS gates outside our gate set;
  // it is accounted for by its closed-form size and depth.
  const std::int64_t loader_gates =
      static_cast<std::int64_t>(config.n_c - 1) + static_cast<std::int64_t>(config.n_c) * (config.n_s - 1);
  const int loader_depth = matrix_loader_depth(config.n_c, config.n_s);

  const RegisterLayout pair{config.n_c, config.n_s};
  const Circuit qft = build_uqft(config.n_s).on_register(Register::Bottom, pair);
  const Circuit iqft = build_uqft(config.n_s, true).on_register(Register::Bottom, pair);
  const QflParams zero = QflParams::zero_like(config);

  if (config.variant == Variant::Composite) {
    const Circuit block = composite_param_circuit(config, zero.thetas.front());
    const int total = config.n_c + config.n_s;
    std::vector<Gate> gates = shifted(build_uqft(config.n_s), config.n_c);
    for (const Gate& g : block.gates()) gates.push_back(g);
    for (Gate& g : shifted(build_uqft(config.n_s, true), config.n_c)) gates.push_back(g);
    const Circuit flat(RegisterLayout{total, 0}, std::move(gates));
    r.gate_count = loader_gates + flat.elementary_gate_count();
    r.measured_depth = loader_depth + flat.depth();
    r.param_layers = qfl_layout(config).layer_count();
    return r;
  }

  const Layout layout = qfl_layout(config);
  r.param_layers = layout.layer_count();
  if (config.variant == Variant::Sequential) {
    Circuit c = qft;
    for (int j = 0; j < config.k; ++j) c = c.then(build_controlled_param(layout, zero.thetas[0], j, config.n_s));
    c = c.then(iqft);
    r.gate_count = loader_gates + c.elementary_gate_count();
    r.measured_depth = loader_depth + c.depth();
    return r;
  }
  // Parallel: K identical-shape circuits run side by side; depth is per circuit.
  const Circuit c = qft.then(build_controlled_param(layout, zero.thetas[0], 0, config.n_s)).then(iqft);
  r.gate_count = config.k * (loader_gates + c.elementary_gate_count());
  r.measured_depth = loader_depth + c.depth();
  return r;
}

}  // namespace qfno
