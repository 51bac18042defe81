#include "qfno/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "qfno/dense.hpp"
#include "qfno/error.hpp"
#include "qfno/loaders.hpp"
#include "qfno/measure.hpp"
#include "qfno/model.hpp"
#include "qfno/parlayers.hpp"
#include "qfno/qfl.hpp"
#include "qfno/uqft.hpp"

namespace qfno {
namespace {

using Rng = std::mt19937_64;

double diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Tracks the worst residual of one property over many draws.
class Check {
 public:
  Check(std::string name, double tol) { r_.name = std::move(name), r_.tolerance = tol; }
  void add(double residual) {
    if (!(residual <= r_.max_residual)) r_.max_residual = residual;  // NaN sticks
  }
  Check& detail(std::string d) {
    r_.detail = std::move(d);
    return *this;
  }
  PropertyResult done(bool informational = false) {
    r_.pass = r_.max_residual <= r_.tolerance;
    r_.informational = informational;
    return r_;
  }

 private:
  PropertyResult r_;
};

CVector random_complex(int n, Rng& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex{g(rng), g(rng)};
  return v / v.norm();
}

CMatrix random_complex(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g;
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Complex{g(rng), g(rng)};
  return m / m.norm();
}

Gate random_gate(Register reg, int n, Rng& rng) {
  std::uniform_int_distribution<int> kind(0, 2), qubit(0, n - 1);
  std::uniform_real_distribution<double> angle(-3.2, 3.2);
  const int k = kind(rng);
  const int p = qubit(rng);
  if (k == 0 && n > 1) {
    int q = qubit(rng);
    while (q == p) q = qubit(rng);
    return Rbs{reg, p, q, angle(rng)};
  }
  if (k == 1) return Phase{reg, p, std::polar(1.0, angle(rng))};
  return ZGate{reg, p};
}

Circuit random_circuit(int n, int gates, Rng& rng) {
  std::vector<Gate> g;
  for (int i = 0; i < gates; ++i) g.push_back(random_gate(Register::Top, n, rng));
  return Circuit(RegisterLayout{n, 0}, std::move(g));
}

Circuit random_pair_circuit(int n_top, int n_bot, int gates, Rng& rng) {
  std::uniform_int_distribution<int> kind(0, 3), coin(0, 1), bottom(0, n_bot - 1);
  std::vector<Gate> out;
  for (int i = 0; i < gates; ++i) {
    if (kind(rng) == 3) {
      std::vector<int> targets;
      for (int t = 0; t < n_top; ++t)
        if (coin(rng)) targets.push_back(t);
      out.emplace_back(AntiControlledZ{bottom(rng), targets});
    } else if (coin(rng)) {
      out.push_back(random_gate(Register::Top, n_top, rng));
    } else {
      out.push_back(random_gate(Register::Bottom, n_bot, rng));
    }
  }
  return Circuit(RegisterLayout{n_top, n_bot}, std::move(out));
}

CMatrix z_diag(int n, const std::vector<int>& set) {
  CMatrix d = CMatrix::Identity(n, n);
  for (int i : set) d(i, i) = -1.0;
  return d;
}

QflConfig layer_config(int n_c, int n_s, int k, Variant v) {
  QflConfig c;
  c.n_c = n_c;
  c.n_s = n_s;
  c.k = k;
  c.variant = v;
  return c;
}

std::vector<RMatrix> butterfly_weights(const QflConfig& c, const QflParams& p) {
  std::vector<RMatrix> w;
  for (const auto& t : p.thetas) w.push_back(unary_weight(Layout::butterfly(c.n_c), t));
  return w;
}

// ---- core ------------------------------------------------------------------

void suite_core(std::vector<PropertyResult>& out, Rng& rng) {
  {
    Check c("hw1 simulation matches dense oracle", 1e-10);
    for (int t = 0; t < 100; ++t) {
      const int n = 2 + t % 9;
      const Circuit circ = random_circuit(n, 30, rng);
      UnaryState s{random_complex(n, rng)};
      CVector psi = CVector::Zero(Eigen::Index{1} << n);
      for (int i = 0; i < n; ++i) psi[static_cast<Eigen::Index>(dense_unary_index(i))] = s.amps[i];
      psi = dense_reference_sim(circ, psi);
      apply_circuit(s, circ);
      for (int i = 0; i < n; ++i) c.add(std::abs(psi[static_cast<Eigen::Index>(dense_unary_index(i))] - s.amps[i]));
    }
    out.push_back(c.detail("100 random RBS/phase/Z circuits, n = 2..10").done());
  }
  {
    Check c("pair simulation matches dense oracle", 1e-10);
    for (int t = 0; t < 100; ++t) {
      const int nt = 2 + t % 4, nb = 2 + (t / 4) % 4;
      const Circuit circ = random_pair_circuit(nt, nb, 30, rng);
      PairState s{random_complex(nt, nb, rng)};
      CVector psi = CVector::Zero(Eigen::Index{1} << (nt + nb));
      for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nb; ++j) psi[static_cast<Eigen::Index>(dense_pair_index(nt, i, j))] = s.amps(i, j);
      psi = dense_reference_sim(circ, psi);
      apply_circuit(s, circ);
      for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nb; ++j) c.add(std::abs(psi[static_cast<Eigen::Index>(dense_pair_index(nt, i, j))] - s.amps(i, j)));
    }
    out.push_back(c.detail("100 random circuits with anti-controlled Z, up to 10 qubits").done());
  }
  {
    Check c("hw2 simulation matches dense oracle", 1e-10);
    for (int t = 0; t < 100; ++t) {
      const int n = 2 + t % 9;
      const Circuit circ = random_circuit(n, 30, rng);
      Hw2State s{n, random_complex(hw2_dim(n), rng)};
      CVector psi = CVector::Zero(Eigen::Index{1} << n);
      for (int k = 0; k < hw2_dim(n); ++k) {
        const auto [p, q] = hw2_pair(n, k);
        psi[static_cast<Eigen::Index>(dense_hw2_index(p, q))] = s.amps[k];
      }
      psi = dense_reference_sim(circ, psi);
      apply_circuit(s, circ);
      for (int k = 0; k < hw2_dim(n); ++k) {
        const auto [p, q] = hw2_pair(n, k);
        c.add(std::abs(psi[static_cast<Eigen::Index>(dense_hw2_index(p, q))] - s.amps[k]));
      }
    }
    out.push_back(c.detail("100 random circuits, n = 2..10").done());
  }
  {
    Check c("RBS(theta) then Z equals Z then RBS(-theta)", 1e-12);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    const Eigen::Matrix4cd z0 = Eigen::Vector4cd(1, 1, -1, -1).asDiagonal();
    const Eigen::Matrix4cd z1 = Eigen::Vector4cd(1, -1, 1, -1).asDiagonal();
    for (int t = 0; t < 100; ++t) {
      const double th = angle(rng);
      for (const auto& z : {z0, z1}) c.add((z * rbs_matrix(th) - rbs_matrix(-th) * z).cwiseAbs().maxCoeff());
    }
    out.push_back(c.detail("4x4, Z on either qubit, 100 angles").done());
  }
  {
    Check c("restricted matrices are unitary", 1e-10);
    for (int t = 0; t < 20; ++t) {
      const int n = 3 + t % 6;
      const Circuit circ = random_circuit(n, 40, rng);
      for (Sector sec : {Sector::Hw1, Sector::Hw2}) {
        const CMatrix u = restricted_matrix(circ, sec);
        c.add(diff(u.adjoint() * u, CMatrix::Identity(u.rows(), u.cols())));
      }
    }
    out.push_back(c.done());
  }
  {
    Check c("loader reproduces its input", 1e-12);
    for (int n : {1, 2, 3, 5, 8, 16, 33}) {
      const CVector x = random_complex(n, rng);
      const LoaderPlan plan = loader_plan(x);
      UnaryState s{CVector::Zero(plan.n)};
      s.amps[0] = 1.0;
      apply_circuit(s, plan.circuit());
      for (int i = 0; i < plan.n; ++i) c.add(std::abs(s.amps[i] - (i < n ? x[i] : Complex{})));
    }
    out.push_back(c.done());
  }
  {
    Check c("measurement estimates |amplitude|", 5e-3);
    const PairState s{random_complex(8, 16, rng)};
    const std::uint64_t seed = rng();
    const RMatrix est = amp_estimates(measure_sample(s, 1'000'000, seed));
    c.add((est - s.amps.cwiseAbs()).cwiseAbs().maxCoeff());
    if (measure_sample(s, 1000, seed) != measure_sample(s, 1000, seed)) c.add(INFINITY);
    out.push_back(c.detail("8x16 pair state, 1e6 shots, seeded").done());
  }
}

// ---- uqft ------------------------------------------------------------------

void suite_uqft(std::vector<PropertyResult>& out, Rng& rng) {
  {
    Check c("F_n/√n equivalence n=2..64", 1e-12);
    for (int n = 2; n <= 64; n *= 2) {
      const auto perm = bit_reversal_permutation(n);
      const CMatrix u = restricted_matrix(build_uqft(n), Sector::Hw1);
      CMatrix realised(n, n);
      for (int i = 0; i < n; ++i) realised.col(perm[static_cast<std::size_t>(i)]) = u.col(i);
      c.add(diff(realised, dft_matrix(n).f / std::sqrt(static_cast<double>(n))));
    }
    out.push_back(c.done());
  }
  {
    Check c("inverse UQFT undoes UQFT", 1e-12);
    for (int n = 2; n <= 64; n *= 2) {
      const CMatrix u = restricted_matrix(build_uqft(n), Sector::Hw1);
      const CMatrix ui = restricted_matrix(build_uqft(n, true), Sector::Hw1);
      c.add(diff(ui * u, CMatrix::Identity(n, n)));
    }
    out.push_back(c.done());
  }
  {
    Check c("gate and semantic row transforms agree", 1e-10);
    for (int n : {2, 4, 8, 16, 32}) {
      const PairState s = load_matrix(random_complex(3, n, rng));
      for (bool inv : {false, true}) {
        c.add(diff(apply_uqft_rows(s, inv, TransformPath::Gate).amps, apply_uqft_rows(s, inv, TransformPath::Semantic).amps));
      }
    }
    out.push_back(c.done());
  }
  {
    Check c("gate count n log n, depth <= 2 log n", 0.0);
    for (int n = 2; n <= 64; n *= 2) {
      const Circuit q = build_uqft(n);
      const int stages = std::countr_zero(static_cast<unsigned>(n));
      if (q.size() != static_cast<std::size_t>(n * stages) || q.depth() > 2 * stages) c.add(1.0);
    }
    out.push_back(c.done());
  }
}

// ---- layers ----------------------------------------------------------------

void suite_layers(std::vector<PropertyResult>& out, Rng& rng) {
  const std::vector<Layout> layouts{Layout::butterfly(4), Layout::butterfly(8), Layout::butterfly(16),
                                    Layout::pyramid(5), Layout::pyramid(8), Layout::butterfly_padded(12)};
  {
    Check c("P'(theta) = P^dagger(-theta)", 1e-12);
    for (int t = 0; t < 100; ++t) {
      const Layout& l = layouts[static_cast<std::size_t>(t) % layouts.size()];
      ThetaVector th = init_theta(l, rng), neg = th;
      for (double& v : neg) v = -v;
      c.add(diff(restricted_matrix(build_reversed(l, th), Sector::Hw1),
                 restricted_matrix(build_param_circuit(l, neg), Sector::Hw1).adjoint()));
    }
    out.push_back(c.detail("100 draws over butterfly, pyramid and padded layouts").done());
  }
  {
    Check c("P' U_Z P = U_Z", 1e-12);
    for (int t = 0; t < 100; ++t) {
      const Layout& l = layouts[static_cast<std::size_t>(t) % layouts.size()];
      const ThetaVector th = init_theta(l, rng);
      const CMatrix z = z_diag(l.n, z_index_set(l));
      c.add(diff(restricted_matrix(build_reversed(l, th), Sector::Hw1) * z *
                     restricted_matrix(build_param_circuit(l, th), Sector::Hw1),
                 z));
    }
    out.push_back(c.done());
  }
  {
    Check c("controlled circuit transforms only the control column", 1e-12);
    for (int t = 0; t < 20; ++t) {
      const Layout l = Layout::butterfly(4 << (t % 2));
      const int nb = 4, control = t % nb;
      const ThetaVector th = init_theta(l, rng);
      PairState s{random_complex(l.n, nb, rng)};
      const CMatrix before = s.amps;
      apply_circuit(s, build_controlled_param(l, th, control, nb));
      const RMatrix w = unary_weight(l, th);
      for (int j = 0; j < nb; ++j) {
        const CVector expect = j == control ? CVector(w.cast<Complex>() * before.col(j)) : CVector(before.col(j));
        c.add(diff(s.amps.col(j), expect));
      }
    }
    out.push_back(c.done());
  }
  {
    Check c("unary weight equals the hw1 restriction", 1e-12);
    for (const auto& l : layouts) {
      const ThetaVector th = init_theta(l, rng);
      const CMatrix u = restricted_matrix(build_param_circuit(l, th).then(build_reversed(l, th)), Sector::Hw1);
      c.add(diff(u, unary_weight(l, th).cast<Complex>()));
    }
    out.push_back(c.done());
  }
  for (const bool butterfly : {false, true}) {
    Check c(butterfly ? "butterfly hw2 restriction equals compound of hw1" : "pyramid hw2 restriction equals compound of hw1",
            1e-10);
    for (int n = 2; n <= 12; ++n) {
      if (butterfly && (n & (n - 1)) != 0) continue;
      const Layout l = butterfly ? Layout::butterfly(n) : Layout::pyramid(n);
      const ThetaVector th = init_theta(l, rng);
      const Circuit p = build_param_circuit(l, th);
      const CMatrix hw1 = restricted_matrix(p, Sector::Hw1);
      c.add(diff(restricted_matrix(p, Sector::Hw2), compound_order2(hw1.real()).cast<Complex>()));
    }
    // Recorded, not gated, for the butterfly: an RBS on non-adjacent qubits
    // picks up no reordering sign in the weight-2 sector, the compound does.
    out.push_back(c.detail(butterfly ? "informational" : "n = 2..12").done(butterfly));
  }
}

// ---- equiv -----------------------------------------------------------------

void suite_equiv(std::vector<PropertyResult>& out, Rng& rng) {
  Check seq("sequential ≡ classical-keep with unary weights", 1e-9);
  Check lin("parallel linear recombination ≡ sequential", 1e-9);
  Check spec("parallel spectral recombination ≡ classical-keep", 1e-9);
  Check gate("gate path ≡ semantic path", 1e-9);
  for (int t = 0; t < 100; ++t) {
    const int n_c = 2 << (t % 3);
    const int n_s = 8 << ((t / 3) % 3);
    const int k = 1 + (t / 9) % 4;
    const QflConfig cs = layer_config(n_c, n_s, k, Variant::Sequential);
    const QflConfig cp = layer_config(n_c, n_s, k, Variant::Parallel);
    const CMatrix a = random_complex(n_c, n_s, rng);
    const QflParams p = QflParams::random(cs, rng);
    const auto w = butterfly_weights(cs, p);
    const CMatrix classical = classical_fourier_layer(a, w, k, ModePolicy::Keep);
    const CMatrix s = sequential_qfl(a, p, cs);
    seq.add(diff(s, classical));
    lin.add(diff(recombine_linear(parallel_qfl(a, p, cp), a), s));
    spec.add(diff(recombine_spectral(parallel_pre_iqft(a, p, cp), k), classical));
    if (t % 10 == 0) gate.add(diff(sequential_qfl(a, p, cs, TransformPath::Gate), s));
  }
  out.push_back(seq.detail("100 configs, N_c in {2,4,8}, N_s in {8,16,32}, K <= 4").done());
  out.push_back(lin.done());
  out.push_back(spec.done());
  out.push_back(gate.done());

  Check comp("composite ≡ post-selected flat-register simulation", 1e-9);
  for (auto [n_c, n_s, k] : {std::tuple{2, 4, 1}, std::tuple{3, 4, 2}, std::tuple{2, 8, 2}}) {
    const QflConfig c = layer_config(n_c, n_s, k, Variant::Composite);
    const int total = n_c + n_s;
    const CMatrix a = random_complex(n_c, n_s, rng);
    const QflParams p = QflParams::random(c, rng);
    const auto perm = bit_reversal_permutation(n_s);
    auto shift = [&](const Circuit& sub) {
      std::vector<Gate> gates;
      for (Gate g : sub.gates()) {
        std::visit([&](auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Rbs>) {
            x.p += n_c;
            x.q += n_c;
          } else if constexpr (!std::is_same_v<T, AntiControlledZ>) {
            x.p += n_c;
          }
        }, g);
        gates.push_back(g);
      }
      return Circuit(RegisterLayout{total, 0}, gates);
    };
    const Circuit block(RegisterLayout{total, 0}, composite_param_circuit(c, p.thetas.front()).gates());
    CVector psi = CVector::Zero(Eigen::Index{1} << total);
    for (int i = 0; i < n_c; ++i)
      for (int m = 0; m < n_s; ++m) psi[(Eigen::Index{1} << i) | (Eigen::Index{1} << (n_c + m))] = a(i, perm[static_cast<std::size_t>(m)]);
    psi = dense_reference_sim(shift(build_uqft(n_s)).then(block), psi);
    for (Eigen::Index b = 0; b < psi.size(); ++b) {
      const auto top = static_cast<unsigned>(b) & ((1u << n_c) - 1);
      const auto bot = static_cast<unsigned>(b) >> n_c;
      if (std::popcount(top) != 1 || std::popcount(bot) != 1) psi[b] = 0.0;
    }
    psi = dense_reference_sim(shift(build_uqft(n_s, true)), psi);
    CMatrix y(n_c, n_s);
    for (int i = 0; i < n_c; ++i)
      for (int col = 0; col < n_s; ++col) y(i, col) = psi[(Eigen::Index{1} << i) | (Eigen::Index{1} << (n_c + perm[static_cast<std::size_t>(col)]))];
    comp.add(diff(composite_qfl(a, p, c), y));
  }
  out.push_back(comp.done());
}

// ---- grad ------------------------------------------------------------------

void suite_grad(std::vector<PropertyResult>& out, Rng& rng) {
  Dataset d;
  std::normal_distribution<double> g;
  d.inputs.resize(3, 8);
  d.targets.resize(3, 8);
  for (Eigen::Index i = 0; i < d.inputs.size(); ++i) d.inputs.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < d.targets.size(); ++i) d.targets.data()[i] = g(rng);
  d.grid = unit_grid(8);
  const std::vector<int> rows{0, 1, 2};

  struct Case {
    const char* name;
    Variant v;
    Aggregation agg;
    ModePolicy policy;
  };
  const Case cases[] = {
      {"classical", Variant::Classical, Aggregation::Linear, ModePolicy::Keep},
      {"classical-crop", Variant::Classical, Aggregation::Linear, ModePolicy::Crop},
      {"sequential", Variant::Sequential, Aggregation::Linear, ModePolicy::Keep},
      {"parallel-linear", Variant::Parallel, Aggregation::Linear, ModePolicy::Keep},
      {"parallel-spectral", Variant::Parallel, Aggregation::Spectral, ModePolicy::Keep},
      {"parallel-mean", Variant::Parallel, Aggregation::Mean, ModePolicy::Keep},
      {"composite", Variant::Composite, Aggregation::Linear, ModePolicy::Keep},
  };
  for (const Case& cs : cases) {
    QfnoConfig c;
    c.variant = cs.v;
    c.n_c = 4;
    c.n_s = 8;
    c.k = 2;
    c.t_layers = 2;
    c.parallel_aggregation = cs.agg;
    c.classical_policy = cs.policy;
    c.seed = rng();
    const QfnoModel m = QfnoModel::init(c);
    const std::vector<double> an = grad(m, d, rows).grad.flatten();
    const std::vector<double> x = m.params.flatten();
    Check chk(std::string("gradient vs finite differences: ") + cs.name, 1e-5);
    const double h = 1e-5;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::abs(an[i]) <= 1e-8) continue;
      QfnoModel mm = m;
      std::vector<double> xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      mm.params.assign(xp);
      const double fp = batch_loss(mm, d, rows);
      mm.params.assign(xm);
      const double fm = batch_loss(mm, d, rows);
      chk.add(std::abs((fp - fm) / (2.0 * h) - an[i]) / std::abs(an[i]));
    }
    out.push_back(chk.detail("N_c=4, N_s=8, K=2, T=2; relative error on |g| > 1e-8").done());
  }
}

}  // namespace

bool SuiteReport::pass() const { return first_failure() == nullptr; }

const PropertyResult* SuiteReport::first_failure() const {
  for (const auto& p : properties)
    if (!p.pass && !p.informational) return &p;
  return nullptr;
}

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"core", "uqft", "layers", "equiv", "grad", "all"};
  return names;
}

SuiteReport run_verify_suite(std::string_view suite, std::uint64_t seed) {
  const auto& names = verify_suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown suite '" + std::string(suite) + "'");
  }
  SuiteReport r;
  r.suite = std::string(suite);
  Rng rng(seed);
  const bool all = suite == "all";
  if (all || suite == "core") suite_core(r.properties, rng);
  if (all || suite == "uqft") suite_uqft(r.properties, rng);
  if (all || suite == "layers") suite_layers(r.properties, rng);
  if (all || suite == "equiv") suite_equiv(r.properties, rng);
  if (all || suite == "grad") suite_grad(r.properties, rng);
  return r;
}

nlohmann::json to_json(const SuiteReport& report) {
  nlohmann::json props = nlohmann::json::array();
  for (const auto& p : report.properties) {
    props.push_back({{"name", p.name},
                     {"status", p.informational ? (p.pass ? "info-pass" : "info-fail") : (p.pass ? "pass" : "fail")},
                     {"max_residual", std::isfinite(p.max_residual) ? nlohmann::json(p.max_residual) : nlohmann::json(nullptr)},
                     {"tolerance", p.tolerance},
                     {"detail", p.detail}});
  }
  const PropertyResult* f = report.first_failure();
  return {{"suite", report.suite},
          {"pass", report.pass()},
          {"first_failure", f ? nlohmann::json(f->name) : nlohmann::json(nullptr)},
          {"properties", props}};
}

}  // namespace qfno
