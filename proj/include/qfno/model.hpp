#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "qfno/pde.hpp"
#include "qfno/qfl.hpp"

namespace qfno {

enum class Nonlinearity { Gelu, Relu, None };
enum class LossKind { RelativeL2, Mse };
// Step size over epochs: fixed, or cosine decay from learning_rate to 0.
enum class LrSchedule { Constant, Cosine };

std::string_view to_string(Nonlinearity n);
std::string_view to_string(LossKind l);
std::string_view to_string(LrSchedule s);
Nonlinearity parse_nonlinearity(std::string_view s);
LossKind parse_loss(std::string_view s);
LrSchedule parse_lr_schedule(std::string_view s);

struct QfnoConfig {
  Variant variant = Variant::Sequential;
  int n_c = 8;
  int n_s = 256;
  int k = 4;
  int t_layers = 2;
  int d_in = 2;  // 1: value only, 2: value and coordinate
  int d_out = 1;
  Nonlinearity nonlinearity = Nonlinearity::Gelu;
  Aggregation parallel_aggregation = Aggregation::Linear;
  ModePolicy classical_policy = ModePolicy::Keep;
  LossKind loss = LossKind::RelativeL2;
  double learning_rate = 1e-3;
  LrSchedule lr_schedule = LrSchedule::Cosine;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 100;
  int batch_size = 20;
  std::uint64_t seed = 0;
  int threads = 1;

  QflConfig layer_config() const;
  void validate() const;
};

struct QfnoParams {
  RMatrix p;  // d_in x N_c lift
  std::vector<QflParams> layers;
  RMatrix q;  // N_c x d_out projection

  std::vector<double> flatten() const;
  void assign(const std::vector<double>& flat);
  std::size_t size() const;
};

struct QfnoModel {
  QfnoConfig config;
  QfnoParams params;

  /// Seeded initialisation: fan-in uniform P and Q, layer params per QflParams::random.
  static QfnoModel init(const QfnoConfig& config);
  void check() const;
};

/// Per-location features, one row per grid point: [u0] or [u0, x].
RMatrix lift_features(const RVector& u0, const RVector& grid, int d_in);

/// (features P)^T normalised to unit Frobenius norm; the norm goes to *norm.
CMatrix lift(const RVector& u0, const RVector& grid, const RMatrix& p, double* norm = nullptr);

struct Prediction {
  RVector values;
  // ||Im|| / ||Re|| of the projected output before the real part is taken.
  double imag_ratio = 0.0;
};

Prediction forward(const QfnoModel& model, const RVector& u0, const RVector& grid);

/// ||pred - target|| / ||target||; ZeroTarget when the target vanishes.
double relative_l2(const RVector& pred, const RVector& target);

/// Mean relative error of the model over a dataset.
double evaluate(const QfnoModel& model, const Dataset& data);

struct GradResult {
  double loss = 0.0;  // mean over the batch
  QfnoParams grad;
};

/// Reverse-mode gradient of the mean loss over rows `rows` of the dataset.
GradResult grad(const QfnoModel& model, const Dataset& data, const std::vector<int>& rows);
/// Mean loss only.
double batch_loss(const QfnoModel& model, const Dataset& data, const std::vector<int>& rows);

/// Adam with bias correction over the flattened parameter vector.
class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps);
  void step(std::vector<double>& x, const std::vector<double>& g);
  void set_learning_rate(double lr) { lr_ = lr; }
  long steps() const { return t_; }

 private:
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double test_rel_err = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double final_train_loss = 0.0;
  double final_test_rel_err = 0.0;
  double mean_imag_ratio = 0.0;
};

struct TrainOptions {
  bool record_time = true;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Mini-batch Adam; deterministic for a given config.seed and thread count.
TrainReport train(QfnoModel& model, const Dataset& train_set, const Dataset& test_set,
                  const TrainOptions& options = {});

inline constexpr int kModelSchemaVersion = 1;

void save_model(const QfnoModel& model, const std::filesystem::path& path);
QfnoModel load_model(const std::filesystem::path& path);
std::string model_to_string(const QfnoModel& model);
QfnoModel model_from_string(const std::string& text);

}  // namespace qfno
