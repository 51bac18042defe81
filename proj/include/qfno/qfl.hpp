#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "qfno/parlayers.hpp"
#include "qfno/types.hpp"
#include "qfno/uqft.hpp"

namespace qfno {

enum class Variant { Classical, Sequential, Parallel, Composite };
// What happens to modes >= K in the classical layer.
enum class ModePolicy { Keep, Crop };
// How the K outputs of the parallel variant are merged into one.
enum class Aggregation { Linear, Spectral, Mean };

std::string_view to_string(Variant v);
std::string_view to_string(ModePolicy p);
std::string_view to_string(Aggregation a);
Variant parse_variant(std::string_view s);
ModePolicy parse_mode_policy(std::string_view s);
Aggregation parse_aggregation(std::string_view s);

struct QflConfig {
  int n_c = 2;
  int n_s = 2;
  int k = 1;
  Variant variant = Variant::Sequential;
  ModePolicy policy = ModePolicy::Keep;
  Aggregation aggregation = Aggregation::Linear;
  // Composite only: rescale the post-selected state back to unit norm.
  bool renormalize_postselected = false;

  void validate() const;
};

/// Classical layers use `weights` (K matrices N_c x N_c). Sequential and
/// parallel use K angle vectors over the N_c-qubit butterfly; composite uses
/// one angle vector over the (padded) N_c+K butterfly.
struct QflParams {
  std::vector<RMatrix> weights;
  std::vector<ThetaVector> thetas;

  static QflParams zero_like(const QflConfig& config);
  /// Identity action: W = I, all angles 0.
  static QflParams identity(const QflConfig& config);
  template <typename Rng>
  static QflParams random(const QflConfig& config, Rng& rng);

  void check(const QflConfig& config) const;
  std::size_t scalar_count() const;
};

/// Butterfly used by the quantum variants: N_c qubits, or N_c+K padded for composite.
Layout qfl_layout(const QflConfig& config);

/// Any layer reduces to: row-wise DFT, a real linear map on the first K
/// columns (flattened column-major, length N_c K), a per-column map on the
/// rest, inverse DFT.
struct SpectralOp {
  enum class High { Keep, Zero, Matrix };
  int n_c = 0;
  int k = 0;
  RMatrix low;
  High high = High::Keep;
  RMatrix high_matrix;

  CMatrix apply_modes(const CMatrix& a_hat) const;
};

SpectralOp spectral_op(const QflConfig& config, const QflParams& params);

/// FT, SpectralOp, IFT. Equals the layer output for every variant (semantic
/// path, no renormalisation).
CMatrix apply_spectral(const SpectralOp& op, const CMatrix& a);

/// Pulls cotangents of SpectralOp::low and ::high_matrix back to the params.
QflParams spectral_op_vjp(const QflConfig& config, const QflParams& params, const RMatrix& low_bar,
                          const RMatrix& high_bar);

CMatrix classical_fourier_layer(const CMatrix& a, const std::vector<RMatrix>& weights, int k,
                                ModePolicy policy);

/// Requires ||A||_F = 1. The gate path loads A into a pair state and runs
/// UQFT, K controlled parametrised circuits and the inverse UQFT.
CMatrix sequential_qfl(const CMatrix& a, const QflParams& params, const QflConfig& config,
                       TransformPath path = TransformPath::Semantic);

/// The K circuit outputs O_k; circuit k transforms mode k only.
std::vector<CMatrix> parallel_qfl(const CMatrix& a, const QflParams& params, const QflConfig& config,
                                  TransformPath path = TransformPath::Semantic);
/// States of the K circuits just before their inverse UQFT (rows already in Fourier space).
std::vector<CMatrix> parallel_pre_iqft(const CMatrix& a, const QflParams& params,
                                       const QflConfig& config,
                                       TransformPath path = TransformPath::Semantic);

/// Sum of O_k minus (K-1) A.
CMatrix recombine_linear(const std::vector<CMatrix>& outputs, const CMatrix& a);
/// Column k from spectrum k, columns >= K from spectrum 0, then inverse DFT.
CMatrix recombine_spectral(const std::vector<CMatrix>& spectra, int k);
CMatrix recombine_mean(const std::vector<CMatrix>& outputs);

/// Weight-1 and weight-2 restrictions of one parametrised circuit over the
/// top register plus the first K bottom qubits, with post-selection back
/// onto the input support.
CMatrix composite_qfl(const CMatrix& a, const QflParams& params, const QflConfig& config);

/// Single-register circuit of the composite's parametrised block: qubits
/// 0..N_c-1 are the top register, N_c..N_c+K-1 the first K bottom qubits.
Circuit composite_param_circuit(const QflConfig& config, const ThetaVector& theta);

/// Dispatches on config.variant; parallel is merged with config.aggregation.
CMatrix apply_layer(const CMatrix& a, const QflParams& params, const QflConfig& config);

struct ComplexityReport {
  Variant variant = Variant::Sequential;
  int qubits = 0;
  int circuit_count = 0;
  std::optional<std::int64_t> gate_count;
  std::optional<int> measured_depth;
  double formula_depth = 0.0;
  std::int64_t param_count = 0;
  // Layer count of the trainable block (composite: butterfly stages over N_c+K).
  std::optional<int> param_layers;
};

ComplexityReport complexity_report(const QflConfig& config);
double formula_depth(const QflConfig& config);
std::int64_t param_count(const QflConfig& config);

template <typename Rng>
QflParams QflParams::random(const QflConfig& config, Rng& rng) {
  config.validate();
  QflParams p;
  if (config.variant == Variant::Classical) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(config.n_c));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (int j = 0; j < config.k; ++j) {
      RMatrix w(config.n_c, config.n_c);
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
      p.weights.push_back(std::move(w));
    }
    return p;
  }
  const Layout layout = qfl_layout(config);
  const int count = config.variant == Variant::Composite ? 1 : config.k;
  for (int j = 0; j < count; ++j) p.thetas.push_back(init_theta(layout, rng));
  return p;
}

}  // namespace qfno
