#include "qfno/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "qfno/error.hpp"
#include "qfno/fourier.hpp"

namespace qfno {
namespace {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
  return cdf + x * pdf;
}

double act(Nonlinearity n, double x) {
  switch (n) {
    case Nonlinearity::Gelu: return gelu(x);
    case Nonlinearity::Relu: return x > 0.0 ? x : 0.0;
    case Nonlinearity::None: return x;
  }
  return x;
}

double act_grad(Nonlinearity n, double x) {
  switch (n) {
    case Nonlinearity::Gelu: return gelu_grad(x);
    case Nonlinearity::Relu: return x > 0.0 ? 1.0 : 0.0;
    case Nonlinearity::None: return 1.0;
  }
  return 1.0;
}

// Real inner product of complex matrices viewed as real vectors.
double real_dot(const CMatrix& a, const CMatrix& b) {
  return (a.real().array() * b.real().array()).sum() + (a.imag().array() * b.imag().array()).sum();
}

struct LayerTrace {
  CMatrix a_hat;  // FT of the layer input
  CMatrix y;      // layer output before the nonlinearity
  double h_norm = 0.0;
  CMatrix a_out;  // normalised output
};

struct Trace {
  RMatrix features;
  double s0 = 0.0;
  CMatrix a0;
  std::vector<LayerTrace> layers;
};

struct Accum {
  RMatrix p, q;
  std::vector<RMatrix> low, high;
  double loss = 0.0;

  Accum(const QfnoModel& m, const std::vector<SpectralOp>& ops) {
    p = RMatrix::Zero(m.params.p.rows(), m.params.p.cols());
    q = RMatrix::Zero(m.params.q.rows(), m.params.q.cols());
    for (const auto& op : ops) {
      low.push_back(RMatrix::Zero(op.low.rows(), op.low.cols()));
      high.push_back(RMatrix::Zero(op.n_c, op.n_c));
    }
  }

  void add(const Accum& o) {
    p += o.p;
    q += o.q;
    for (std::size_t t = 0; t < low.size(); ++t) {
      low[t] += o.low[t];
      high[t] += o.high[t];
    }
    loss += o.loss;
  }
};

class Net {
 public:
  explicit Net(const QfnoModel& m) : m_(m) {
    m.check();
    const QflConfig lc = m.config.layer_config();
    for (const auto& layer : m.params.layers) ops_.push_back(spectral_op(lc, layer));
  }

  const std::vector<SpectralOp>& ops() const { return ops_; }

  RVector run(const RVector& u0, const RVector& grid, Trace& tr, double* imag_ratio = nullptr) const {
    const auto nl = m_.config.nonlinearity;
    tr.features = lift_features(u0, grid, m_.config.d_in);
    const RMatrix z0 = (tr.features * m_.params.p).transpose();
    tr.s0 = z0.norm();
    if (tr.s0 == 0.0) throw Error(ErrorCode::ZeroMatrix, "lifted input is zero");
    tr.a0 = (z0 / tr.s0).cast<Complex>();
    tr.layers.clear();
    const CMatrix* a = &tr.a0;
    for (const auto& op : ops_) {
      LayerTrace lt;
      lt.a_hat = dft_rows(*a);
      lt.y = dft_rows(op.apply_modes(lt.a_hat), true);
      CMatrix h(lt.y.rows(), lt.y.cols());
      for (Eigen::Index i = 0; i < h.size(); ++i) {
        h.data()[i] = Complex{act(nl, lt.y.data()[i].real()), act(nl, lt.y.data()[i].imag())};
      }
      lt.h_norm = h.norm();
      if (lt.h_norm == 0.0 || !std::isfinite(lt.h_norm)) {
        throw Error(ErrorCode::NonFiniteLoss, "layer output has no usable norm");
      }
      lt.a_out = h / lt.h_norm;
      tr.layers.push_back(std::move(lt));
      a = &tr.layers.back().a_out;
    }
    const CVector out = tr.s0 * (a->transpose() * m_.params.q.col(0).cast<Complex>());
    if (imag_ratio) {
      const double re = out.real().norm();
      *imag_ratio = re > 0.0 ? out.imag().norm() / re : 0.0;
    }
    return out.real();
  }

  void backward(const Trace& tr, const RVector& pred_bar, Accum& acc) const {
    const auto nl = m_.config.nonlinearity;
    const RMatrix& q = m_.params.q;
    const CMatrix& a_t = tr.layers.empty() ? tr.a0 : tr.layers.back().a_out;
    const RMatrix a_t_re = a_t.real();

    acc.q.col(0) += tr.s0 * a_t_re * pred_bar;
    const double s0_bar = pred_bar.dot(a_t_re.transpose() * q.col(0));
    CMatrix a_bar = (tr.s0 * q.col(0) * pred_bar.transpose()).cast<Complex>();

    for (std::size_t t = tr.layers.size(); t-- > 0;) {
      const LayerTrace& lt = tr.layers[t];
      const SpectralOp& op = ops_[t];
      // Through the renormalisation A = H / ||H||.
      const CMatrix h_bar = (a_bar - real_dot(lt.a_out, a_bar) * lt.a_out) / lt.h_norm;
      CMatrix y_bar(h_bar.rows(), h_bar.cols());
      for (Eigen::Index i = 0; i < y_bar.size(); ++i) {
        const Complex y = lt.y.data()[i];
        const Complex g = h_bar.data()[i];
        y_bar.data()[i] = Complex{act_grad(nl, y.real()) * g.real(), act_grad(nl, y.imag()) * g.imag()};
      }
      // The adjoint of the unitary inverse DFT is the forward DFT.
      const CMatrix z_bar = dft_rows(y_bar);
      CMatrix ahat_bar = z_bar;

      const Eigen::Index m = static_cast<Eigen::Index>(op.n_c) * op.k;
      Eigen::Map<const CVector> v(lt.a_hat.data(), m);
      Eigen::Map<const CVector> vp_bar(z_bar.data(), m);
      const RVector v_re = v.real(), v_im = v.imag();
      const RVector g_re = vp_bar.real(), g_im = vp_bar.imag();
      acc.low[t] += g_re * v_re.transpose() + g_im * v_im.transpose();
      const RVector back_re = op.low.transpose() * g_re;
      const RVector back_im = op.low.transpose() * g_im;
      Eigen::Map<CVector> dst(ahat_bar.data(), m);
      for (Eigen::Index i = 0; i < m; ++i) dst[i] = Complex{back_re[i], back_im[i]};

      const Eigen::Index rest = z_bar.cols() - op.k;
      if (op.high == SpectralOp::High::Zero) {
        ahat_bar.rightCols(rest).setZero();
      } else if (op.high == SpectralOp::High::Matrix) {
        const auto zh = z_bar.rightCols(rest);
        const auto ah = lt.a_hat.rightCols(rest);
        acc.high[t] += zh.real() * ah.real().transpose() + zh.imag() * ah.imag().transpose();
        ahat_bar.rightCols(rest) = op.high_matrix.transpose().cast<Complex>() * zh;
      }
      a_bar = dft_rows(ahat_bar, true);
    }

    // A0 = Z0 / s0 with s0 = ||Z0||, and s0 also scales the output.
    const RMatrix a0 = tr.a0.real();
    const RMatrix r = a_bar.real();
    const RMatrix z0_bar = (r - (a0.array() * r.array()).sum() * a0) / tr.s0 + s0_bar * a0;
    acc.p += tr.features.transpose() * z0_bar.transpose();
  }

 private:
  const QfnoModel& m_;
  std::vector<SpectralOp> ops_;
};

// Loss of one sample; writes d loss / d pred scaled by `weight`.
double sample_loss(LossKind kind, const RVector& pred, const RVector& target, double weight, RVector* pred_bar) {
  const RVector diff = pred - target;
  if (kind == LossKind::Mse) {
    const double n = static_cast<double>(pred.size());
    if (pred_bar) *pred_bar = (2.0 * weight / n) * diff;
    return diff.squaredNorm() / n;
  }
  const double nt = target.norm();
  if (nt == 0.0) throw Error(ErrorCode::ZeroTarget, "relative error of a zero target");
  const double nd = diff.norm();
  if (pred_bar) *pred_bar = nd > 0.0 ? RVector(diff * (weight / (nd * nt))) : RVector::Zero(diff.size());
  return nd / nt;
}

void check_dataset_fits(const QfnoModel& model, const Dataset& data) {
  data.check();
  if (data.resolution() != model.config.n_s) {
    throw Error(ErrorCode::ShapeMismatch, "dataset resolution " + std::to_string(data.resolution()) +
                                              " does not match N_s = " + std::to_string(model.config.n_s));
  }
}

template <typename Fn>
void run_chunks(int count, int threads, Fn fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    fn(0, 0, count);
    return;
  }
  std::vector<std::jthread> pool;
  for (int t = 0; t < threads; ++t) {
    const int begin = count * t / threads;
    const int end = count * (t + 1) / threads;
    pool.emplace_back([=] { fn(t, begin, end); });
  }
}

}  // namespace

std::string_view to_string(Nonlinearity n) {
  switch (n) {
    case Nonlinearity::Gelu: return "gelu";
    case Nonlinearity::Relu: return "relu";
    case Nonlinearity::None: return "none";
  }
  return "?";
}

std::string_view to_string(LossKind l) { return l == LossKind::Mse ? "mse" : "relative_l2"; }

std::string_view to_string(LrSchedule s) { return s == LrSchedule::Cosine ? "cosine" : "constant"; }

LrSchedule parse_lr_schedule(std::string_view s) {
  for (auto l : {LrSchedule::Constant, LrSchedule::Cosine})
    if (to_string(l) == s) return l;
  throw Error(ErrorCode::InvalidArgument, "unknown learning-rate schedule '" + std::string(s) + "'");
}

Nonlinearity parse_nonlinearity(std::string_view s) {
  for (auto n : {Nonlinearity::Gelu, Nonlinearity::Relu, Nonlinearity::None})
    if (to_string(n) == s) return n;
  throw Error(ErrorCode::InvalidArgument, "unknown nonlinearity '" + std::string(s) + "'");
}

LossKind parse_loss(std::string_view s) {
  for (auto l : {LossKind::RelativeL2, LossKind::Mse})
    if (to_string(l) == s) return l;
  throw Error(ErrorCode::InvalidArgument, "unknown loss '" + std::string(s) + "'");
}

QflConfig QfnoConfig::layer_config() const {
  QflConfig c;
  c.n_c = n_c;
  c.n_s = n_s;
  c.k = k;
  c.variant = variant;
  c.policy = classical_policy;
  c.aggregation = parallel_aggregation;
  return c;
}

void QfnoConfig::validate() const {
  layer_config().validate();
  if (t_layers < 0) throw Error(ErrorCode::InvalidArgument, "T_layers must be non-negative");
  if (d_in != 1 && d_in != 2) throw Error(ErrorCode::InvalidArgument, "d_in must be 1 (value) or 2 (value, coordinate)");
  if (d_out != 1) throw Error(ErrorCode::InvalidArgument, "only scalar outputs (d_out = 1) are supported");
  if (epochs < 0 || batch_size < 1 || threads < 1) {
    throw Error(ErrorCode::InvalidArgument, "epochs >= 0, batch_size >= 1 and threads >= 1 required");
  }
  if (!(learning_rate >= 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bad optimiser hyperparameters");
  }
}

std::vector<double> QfnoParams::flatten() const {
  std::vector<double> x;
  x.reserve(size());
  x.insert(x.end(), p.data(), p.data() + p.size());
  for (const auto& l : layers) {
    for (const auto& w : l.weights) x.insert(x.end(), w.data(), w.data() + w.size());
    for (const auto& t : l.thetas) x.insert(x.end(), t.begin(), t.end());
  }
  x.insert(x.end(), q.data(), q.data() + q.size());
  return x;
}

void QfnoParams::assign(const std::vector<double>& x) {
  if (x.size() != size()) throw Error(ErrorCode::LengthMismatch, "flat parameter vector has the wrong length");
  auto it = x.begin();
  auto take = [&](double* dst, std::size_t n) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(n), dst);
    it += static_cast<std::ptrdiff_t>(n);
  };
  take(p.data(), static_cast<std::size_t>(p.size()));
  for (auto& l : layers) {
    for (auto& w : l.weights) take(w.data(), static_cast<std::size_t>(w.size()));
    for (auto& t : l.thetas) take(t.data(), t.size());
  }
  take(q.data(), static_cast<std::size_t>(q.size()));
}

std::size_t QfnoParams::size() const {
  std::size_t n = static_cast<std::size_t>(p.size() + q.size());
  for (const auto& l : layers) n += l.scalar_count();
  return n;
}

QfnoModel QfnoModel::init(const QfnoConfig& config) {
  config.validate();
  QfnoModel m;
  m.config = config;
  std::mt19937_64 rng(config.seed);
  auto uniform = [&](int rows, int cols, double bound) {
    std::uniform_real_distribution<double> d(-bound, bound);
    RMatrix r(rows, cols);
    for (Eigen::Index j = 0; j < r.cols(); ++j)
      for (Eigen::Index i = 0; i < r.rows(); ++i) r(i, j) = d(rng);
    return r;
  };
  m.params.p = uniform(config.d_in, config.n_c, 1.0 / std::sqrt(static_cast<double>(config.d_in)));
  const QflConfig lc = config.layer_config();
  for (int t = 0; t < config.t_layers; ++t) m.params.layers.push_back(QflParams::random(lc, rng));
  m.params.q = uniform(config.n_c, config.d_out, 1.0 / std::sqrt(static_cast<double>(config.n_c)));
  return m;
}

void QfnoModel::check() const {
  config.validate();
  if (params.p.rows() != config.d_in || params.p.cols() != config.n_c || params.q.rows() != config.n_c ||
      params.q.cols() != config.d_out || params.layers.size() != static_cast<std::size_t>(config.t_layers)) {
    throw Error(ErrorCode::ShapeMismatch, "model parameters do not match the config");
  }
  const QflConfig lc = config.layer_config();
  for (const auto& l : params.layers) l.check(lc);
  for (double v : params.flatten()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteLoss, "model holds a non-finite parameter");
  }
}

RMatrix lift_features(const RVector& u0, const RVector& grid, int d_in) {
  if (u0.size() != grid.size()) throw Error(ErrorCode::ShapeMismatch, "input and grid lengths differ");
  RMatrix f(u0.size(), d_in);
  f.col(0) = u0;
  if (d_in == 2) f.col(1) = grid;
  return f;
}

CMatrix lift(const RVector& u0, const RVector& grid, const RMatrix& p, double* norm) {
  const RMatrix z = (lift_features(u0, grid, static_cast<int>(p.rows())) * p).transpose();
  const double s = z.norm();
  if (s == 0.0) throw Error(ErrorCode::ZeroMatrix, "lifted input is zero");
  if (norm) *norm = s;
  return (z / s).cast<Complex>();
}

Prediction forward(const QfnoModel& model, const RVector& u0, const RVector& grid) {
  if (u0.size() != model.config.n_s) throw Error(ErrorCode::ShapeMismatch, "input length must equal N_s");
  const Net net(model);
  Trace tr;
  Prediction p;
  p.values = net.run(u0, grid, tr, &p.imag_ratio);
  return p;
}

double relative_l2(const RVector& pred, const RVector& target) {
  if (pred.size() != target.size()) throw Error(ErrorCode::LengthMismatch, "prediction and target lengths differ");
  return sample_loss(LossKind::RelativeL2, pred, target, 1.0, nullptr);
}

double evaluate(const QfnoModel& model, const Dataset& data) {
  check_dataset_fits(model, data);
  if (data.count() == 0) return 0.0;
  const Net net(model);
  std::vector<double> errs(static_cast<std::size_t>(data.count()));
  run_chunks(data.count(), model.config.threads, [&](int, int begin, int end) {
    Trace tr;
    for (int i = begin; i < end; ++i) {
      const RVector pred = net.run(data.inputs.row(i).transpose(), data.grid, tr);
      errs[static_cast<std::size_t>(i)] = relative_l2(pred, data.targets.row(i).transpose());
    }
  });
  return std::accumulate(errs.begin(), errs.end(), 0.0) / data.count();
}

GradResult grad(const QfnoModel& model, const Dataset& data, const std::vector<int>& rows) {
  check_dataset_fits(model, data);
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
  const Net net(model);
  const int count = static_cast<int>(rows.size());
  const double weight = 1.0 / count;
  const int threads = std::max(1, std::min(model.config.threads, count));
  std::vector<Accum> parts(static_cast<std::size_t>(threads), Accum(model, net.ops()));
  run_chunks(count, threads, [&](int t, int begin, int end) {
    Accum& acc = parts[static_cast<std::size_t>(t)];
    Trace tr;
    RVector pred_bar;
    for (int b = begin; b < end; ++b) {
      const int i = rows[static_cast<std::size_t>(b)];
      const RVector pred = net.run(data.inputs.row(i).transpose(), data.grid, tr);
      acc.loss += weight * sample_loss(model.config.loss, pred, data.targets.row(i).transpose(), weight, &pred_bar);
      net.backward(tr, pred_bar, acc);
    }
  });
  Accum total = parts.front();
  for (std::size_t t = 1; t < parts.size(); ++t) total.add(parts[t]);
  if (!std::isfinite(total.loss)) throw Error(ErrorCode::NonFiniteLoss, "loss is not finite");

  GradResult r;
  r.loss = total.loss;
  r.grad.p = total.p;
  r.grad.q = total.q;
  const QflConfig lc = model.config.layer_config();
  for (std::size_t t = 0; t < model.params.layers.size(); ++t) {
    r.grad.layers.push_back(spectral_op_vjp(lc, model.params.layers[t], total.low[t], total.high[t]));
  }
  return r;
}

double batch_loss(const QfnoModel& model, const Dataset& data, const std::vector<int>& rows) {
  check_dataset_fits(model, data);
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
  const Net net(model);
  Trace tr;
  double loss = 0.0;
  for (int i : rows) {
    const RVector pred = net.run(data.inputs.row(i).transpose(), data.grid, tr);
    loss += sample_loss(model.config.loss, pred, data.targets.row(i).transpose(), 1.0, nullptr);
  }
  return loss / static_cast<double>(rows.size());
}

Adam::Adam(double lr, double beta1, double beta2, double eps) : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

void Adam::step(std::vector<double>& x, const std::vector<double>& g) {
  if (g.size() != x.size()) throw Error(ErrorCode::LengthMismatch, "gradient and parameter lengths differ");
  if (m_.empty()) {
    m_.assign(x.size(), 0.0);
    v_.assign(x.size(), 0.0);
  }
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < x.size(); ++i) {
    m_[i] = b1_ * m_[i] + (1.0 - b1_) * g[i];
    v_[i] = b2_ * v_[i] + (1.0 - b2_) * g[i] * g[i];
    x[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

TrainReport train(QfnoModel& model, const Dataset& train_set, const Dataset& test_set, const TrainOptions& options) {
  const QfnoConfig& cfg = model.config;
  model.check();
  check_dataset_fits(model, train_set);
  check_dataset_fits(model, test_set);
  if (train_set.count() == 0) throw Error(ErrorCode::InvalidArgument, "empty training set");

  Adam opt(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 0x5eedu};
  std::mt19937_64 shuffle_rng(seq);
  std::vector<int> order(static_cast<std::size_t>(train_set.count()));
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    if (cfg.lr_schedule == LrSchedule::Cosine) {
      const double phase = kPi * (epoch - 1) / cfg.epochs;
      opt.set_learning_rate(cfg.learning_rate * 0.5 * (1.0 + std::cos(phase)));
    }
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      const std::vector<int> rows(order.begin() + static_cast<std::ptrdiff_t>(b), order.begin() + static_cast<std::ptrdiff_t>(e));
      const GradResult g = grad(model, train_set, rows);
      const std::vector<double> flat_g = g.grad.flatten();
      for (double v : flat_g) {
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::NonFiniteLoss, "non-finite gradient in epoch " + std::to_string(epoch));
        }
      }
      loss_sum += g.loss * static_cast<double>(rows.size());
      std::vector<double> x = model.params.flatten();
      opt.step(x, flat_g);
      model.params.assign(x);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / train_set.count();
    rec.test_rel_err = test_set.count() > 0 ? evaluate(model, test_set) : 0.0;
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.test_rel_err)) {
      throw Error(ErrorCode::NonFiniteLoss, "non-finite loss in epoch " + std::to_string(epoch));
    }
    rec.seconds = options.record_time
                      ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
                      : 0.0;
    report.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
  }
  if (!report.epochs.empty()) {
    report.final_train_loss = report.epochs.back().train_loss;
    report.final_test_rel_err = report.epochs.back().test_rel_err;
  } else {
    report.final_test_rel_err = test_set.count() > 0 ? evaluate(model, test_set) : 0.0;
  }
  double ratio = 0.0;
  for (int i = 0; i < test_set.count(); ++i) {
    ratio += forward(model, test_set.inputs.row(i).transpose(), test_set.grid).imag_ratio;
  }
  report.mean_imag_ratio = test_set.count() > 0 ? ratio / test_set.count() : 0.0;
  return report;
}

}  // namespace qfno
