// Acceptance run: one PASS/FAIL line per criterion. Usage: acceptance [criterion...]
// Exit status is nonzero when a criterion fails that is not a documented deviation.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "qfno/dense.hpp"
#include "qfno/measure.hpp"
#include "qfno/model.hpp"
#include "qfno/parlayers.hpp"
#include "qfno/pde.hpp"
#include "qfno/qfl.hpp"
#include "qfno/uqft.hpp"
#include "test_support.hpp"

using namespace qfno;
using namespace qfno::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Criterion 5 fails for the butterfly: the weight-2 action of an RBS on
// non-adjacent qubits is not the compound matrix. Reported, not hidden.
const std::set<int> kKnownDeviations{5};

CMatrix naive_unitary_dft(int n) {
  CMatrix f(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) f(j, k) = std::polar(1.0 / std::sqrt(double(n)), 2.0 * kPi * j * k / n);
  return f;
}

// Full 2^n unitary by columns of the dense simulator.
CMatrix dense_unitary(const Circuit& c) {
  const Eigen::Index dim = Eigen::Index{1} << c.layout().total();
  CMatrix u(dim, dim);
  for (Eigen::Index b = 0; b < dim; ++b) u.col(b) = dense_reference_sim(c, CVector::Unit(dim, b));
  return u;
}

QflConfig qfl_config(int n_c, int n_s, int k, Variant v) {
  QflConfig c;
  c.n_c = n_c;
  c.n_s = n_s;
  c.k = k;
  c.variant = v;
  return c;
}

Outcome c1_uqft() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int n = 2; n <= 64; n *= 2) {
    const auto perm = bit_reversal_permutation(n);
    const CMatrix u = restricted_matrix(build_uqft(n), Sector::Hw1);
    CMatrix realised(n, n);
    for (int i = 0; i < n; ++i) realised.col(perm[static_cast<std::size_t>(i)]) = u.col(i);
    worst = std::max(worst, max_abs_diff(realised, naive_unitary_dft(n)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-12 && secs < 5.0, "max|d| = " + sci(worst) + " over n = 2..64, " + sci(secs) + " s"};
}

Outcome c2_dense() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  int circuits = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 9;
    const Circuit c = random_single_register_circuit(n, 40, rng);
    UnaryState u{random_complex(n, rng)};
    const CVector du = dense_reference_sim(c, embed_unary(u));
    apply_circuit(u, c);
    worst = std::max(worst, max_abs_diff(embed_unary(u), du));
    Hw2State h{n, random_complex(hw2_dim(n), rng)};
    const CVector dh = dense_reference_sim(c, embed_hw2(h));
    apply_circuit(h, c);
    worst = std::max(worst, max_abs_diff(embed_hw2(h), dh));
    ++circuits;
  }
  for (int t = 0; t < 200; ++t) {
    const int nt = 2 + t % 5, nb = 2 + (t / 5) % 4;
    if (nt + nb > 10) continue;
    const Circuit c = random_pair_circuit(nt, nb, 40, rng);
    PairState p{random_complex(nt, nb, rng)};
    const CVector dp = dense_reference_sim(c, embed_pair(p));
    apply_circuit(p, c);
    worst = std::max(worst, max_abs_diff(embed_pair(p), dp));
    ++circuits;
  }
  return {worst <= 1e-10 && circuits >= 200,
          std::to_string(circuits) + " circuits (hw1, hw2, pair), max|d| = " + sci(worst)};
}

Outcome c3_identities() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  double thm = 0.0, rev = 0.0, uz = 0.0;
  const Eigen::Matrix4cd z_first = Eigen::Vector4cd(1, 1, -1, -1).asDiagonal();
  const Eigen::Matrix4cd z_second = Eigen::Vector4cd(1, -1, 1, -1).asDiagonal();
  for (int t = 0; t < 100; ++t) {
    const double th = angle(rng);
    for (const auto& z : {z_first, z_second}) thm = std::max(thm, (z * rbs_matrix(th) - rbs_matrix(-th) * z).cwiseAbs().maxCoeff());
  }
  const std::vector<Layout> layouts{Layout::butterfly(4), Layout::butterfly(8), Layout::pyramid(4), Layout::pyramid(6),
                                    Layout::butterfly_padded(6)};
  for (int t = 0; t < 100; ++t) {
    const Layout& l = layouts[static_cast<std::size_t>(t) % layouts.size()];
    const ThetaVector th = init_theta(l, rng);
    ThetaVector neg = th;
    for (double& v : neg) v = -v;
    const Circuit p = build_param_circuit(l, th);
    const Circuit pr = build_reversed(l, th);
    // Full-space check for small registers, sector check always.
    if (l.n <= 8) rev = std::max(rev, max_abs_diff(dense_unitary(pr), dense_unitary(build_param_circuit(l, neg)).adjoint()));
    rev = std::max(rev, max_abs_diff(restricted_matrix(pr, Sector::Hw1),
                                     restricted_matrix(build_param_circuit(l, neg), Sector::Hw1).adjoint()));
    CMatrix z = CMatrix::Identity(l.n, l.n);
    for (int i : z_index_set(l)) z(i, i) = -1.0;
    uz = std::max(uz, max_abs_diff(restricted_matrix(pr, Sector::Hw1) * z * restricted_matrix(p, Sector::Hw1), z));
  }
  const double worst = std::max({thm, rev, uz});
  return {worst <= 1e-12, "RBS/Z " + sci(thm) + ", P'=P^dag(-theta) " + sci(rev) + ", P'U_Z P=U_Z " + sci(uz)};
}

Outcome c4_layers() {
  std::mt19937_64 rng(4);
  double seq = 0.0, lin = 0.0, spec = 0.0;
  int configs = 0;
  for (int t = 0; t < 120; ++t) {
    const int n_c = 2 << (t % 3);
    const int n_s = 8 << ((t / 3) % 3);
    const int k = 1 + (t / 9) % 4;
    const CMatrix a = random_complex(n_c, n_s, rng);
    const QflConfig cs = qfl_config(n_c, n_s, k, Variant::Sequential);
    const QflParams p = QflParams::random(cs, rng);
    // Oracle: explicit DFT matrix, weights from the circuit restriction.
    const Layout l = Layout::butterfly(n_c);
    const CMatrix f = naive_unitary_dft(n_s);
    CMatrix a_hat = a * f;
    for (int j = 0; j < k; ++j) {
      const auto& th = p.thetas[static_cast<std::size_t>(j)];
      const CMatrix w = restricted_matrix(build_param_circuit(l, th).then(build_reversed(l, th)), Sector::Hw1);
      a_hat.col(j) = w * a_hat.col(j);
    }
    const CMatrix classical = a_hat * f.adjoint();
    const CMatrix s = sequential_qfl(a, p, cs);
    const QflConfig cp = qfl_config(n_c, n_s, k, Variant::Parallel);
    seq = std::max(seq, max_abs_diff(s, classical));
    lin = std::max(lin, max_abs_diff(recombine_linear(parallel_qfl(a, p, cp), a), s));
    spec = std::max(spec, max_abs_diff(recombine_spectral(parallel_pre_iqft(a, p, cp), k), classical));
    ++configs;
  }
  const double worst = std::max({seq, lin, spec});
  return {worst <= 1e-9, std::to_string(configs) + " configs; seq~classical " + sci(seq) + ", linear~seq " + sci(lin) +
                             ", spectral~classical " + sci(spec)};
}

Outcome c5_compound() {
  std::mt19937_64 rng(5);
  double pyr = 0.0, bfly = 0.0;
  for (int n = 2; n <= 12; ++n) {
    for (bool butterfly : {false, true}) {
      if (butterfly && !std::has_single_bit(static_cast<unsigned>(n))) continue;
      const Layout l = butterfly ? Layout::butterfly(n) : Layout::pyramid(n);
      const Circuit p = build_param_circuit(l, init_theta(l, rng));
      const CMatrix hw1 = restricted_matrix(p, Sector::Hw1);
      const double d = max_abs_diff(restricted_matrix(p, Sector::Hw2), compound_order2(hw1.real()).cast<Complex>());
      (butterfly ? bfly : pyr) = std::max(butterfly ? bfly : pyr, d);
    }
  }
  return {std::max(pyr, bfly) <= 1e-10, "pyramid max|d| = " + sci(pyr) + "; butterfly max|d| = " + sci(bfly) +
                                            (bfly > 1e-10 ? " (identity holds for nearest-neighbour layouts only)" : "")};
}

Outcome c6_gradients() {
  std::mt19937_64 rng(6);
  Dataset d;
  d.inputs = random_real(3, 8, rng);
  d.targets = random_real(3, 8, rng);
  d.grid = unit_grid(8);
  const std::vector<int> rows{0, 1, 2};
  double worst = 0.0;
  int checked = 0;
  const std::pair<Variant, Aggregation> variants[] = {
      {Variant::Classical, Aggregation::Linear}, {Variant::Sequential, Aggregation::Linear},
      {Variant::Parallel, Aggregation::Linear},  {Variant::Parallel, Aggregation::Spectral},
      {Variant::Parallel, Aggregation::Mean},    {Variant::Composite, Aggregation::Linear}};
  for (auto [v, agg] : variants) {
    QfnoConfig c;
    c.variant = v;
    c.parallel_aggregation = agg;
    c.n_c = 4;
    c.n_s = 8;
    c.k = 2;
    c.t_layers = 1;
    c.seed = rng();
    const QfnoModel m = QfnoModel::init(c);
    const auto g = grad(m, d, rows).grad.flatten();
    const auto x = m.params.flatten();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::abs(g[i]) <= 1e-8) continue;
      QfnoModel mm = m;
      auto xp = x, xm = x;
      xp[i] += 1e-5;
      xm[i] -= 1e-5;
      mm.params.assign(xp);
      const double fp = batch_loss(mm, d, rows);
      mm.params.assign(xm);
      const double fm = batch_loss(mm, d, rows);
      worst = std::max(worst, std::abs((fp - fm) / 2e-5 - g[i]) / std::abs(g[i]));
      ++checked;
    }
  }
  return {worst <= 1e-5, std::to_string(checked) + " components over 6 variant settings, max rel err = " + sci(worst)};
}

Outcome c7_burgers() {
  const auto t0 = std::chrono::steady_clock::now();
  GrfSpec g;
  g.resolution = 256;
  g.seed = 0;
  BurgersSpec b;
  b.nu = 0.1;
  const Dataset all = make_dataset(600, g, b);
  const Dataset train_set = all.slice(0, 500), test_set = all.slice(500, 100);
  std::fprintf(stderr, "  data: %.1f s\n",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  // One shared configuration for every variant.
  QfnoConfig c;
  c.n_c = 8;
  c.n_s = 256;
  c.k = 4;
  c.t_layers = 2;
  c.epochs = 100;
  c.seed = 0;
  c.learning_rate = 1e-2;
  c.lr_schedule = LrSchedule::Cosine;

  double err[4] = {};
  const Variant vs[] = {Variant::Classical, Variant::Sequential, Variant::Parallel, Variant::Composite};
  for (int i = 0; i < 4; ++i) {
    c.variant = vs[i];
    QfnoModel m = QfnoModel::init(c);
    const auto s = std::chrono::steady_clock::now();
    err[i] = train(m, train_set, test_set).final_test_rel_err;
    std::fprintf(stderr, "  %-10s test rel err %.4f (%.1f s)\n", std::string(to_string(vs[i])).c_str(), err[i],
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = err[0] <= 0.15 && secs <= 45 * 60;
  std::string detail = "classical " + sci(err[0]);
  for (int i = 1; i < 4; ++i) {
    ok = ok && err[i] <= 1.5 * err[0];
    detail += ", " + std::string(to_string(vs[i])) + " " + sci(err[i]) + " (" + sci(err[i] / err[0]) + "x)";
  }
  return {ok, detail + "; " + sci(secs) + " s"};
}

Outcome c8_complexity() {
  bool ok = true;
  double lo = 1e9, hi = 0.0;
  for (int n_c : {2, 4, 8, 16})
    for (int n_s : {8, 16, 32, 64, 128})
      for (int k : {1, 2, 4}) {
        const QflConfig c = qfl_config(n_c, n_s, k, Variant::Sequential);
        const ComplexityReport r = complexity_report(c);
        const double ls = std::log2(double(n_s)), lc = std::log2(double(n_c));
        const double formula = (n_c + 2) * ls + (2 * k + 1) * lc + k * n_c;
        ok = ok && std::abs(r.formula_depth - formula) < 1e-9 && r.measured_depth.has_value();
        const double ratio = *r.measured_depth / formula;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ok = ok && ratio >= 0.25 && ratio <= 2.0;
        const double doubled = formula_depth(qfl_config(n_c, 2 * n_s, k, Variant::Sequential));
        ok = ok && doubled - r.formula_depth == n_c + 2;
        const ComplexityReport par = complexity_report(qfl_config(n_c, n_s, k, Variant::Parallel));
        ok = ok && par.circuit_count == k;
        const ComplexityReport comp = complexity_report(qfl_config(n_c, n_s, k, Variant::Composite));
        ok = ok && comp.param_layers == static_cast<int>(std::ceil(std::log2(double(n_c + k))));
      }
  return {ok, "measured/formula depth in [" + sci(lo) + ", " + sci(hi) + "]; N_s doubling, K circuits, log2(N_c+K) stages checked"};
}

Outcome c9_params() {
  bool ok = true;
  for (int n_c : {8, 16, 32, 64})
    for (int k : {4, 8, 12, 16}) {
      const auto cl = param_count(qfl_config(n_c, 256, k, Variant::Classical));
      const auto sq = param_count(qfl_config(n_c, 256, k, Variant::Sequential));
      const auto pa = param_count(qfl_config(n_c, 256, k, Variant::Parallel));
      const auto co = param_count(qfl_config(n_c, 256, k, Variant::Composite));
      ok = ok && cl == std::int64_t(k) * n_c * n_c && sq == std::int64_t(k) * (n_c / 2) * std::countr_zero(unsigned(n_c));
      ok = ok && cl > sq && sq == pa && pa > co;
    }
  const auto at = [](Variant v) { return std::to_string(param_count(qfl_config(8, 256, 4, v))); };
  return {ok, "classical > sequential = parallel > composite on 16 grid points (N_c=8,K=4: " + at(Variant::Classical) +
                  "/" + at(Variant::Sequential) + "/" + at(Variant::Parallel) + "/" + at(Variant::Composite) + ")"};
}

Outcome c10_measure() {
  std::mt19937_64 rng(10);
  const PairState s{random_complex(8, 16, rng)};
  const auto counts = measure_sample(s, 1'000'000, 1234);
  const double d = (amp_estimates(counts) - s.amps.cwiseAbs()).cwiseAbs().maxCoeff();
  const bool same = measure_sample(s, 1'000'000, 1234) == counts;
  return {d <= 5e-3 && same, "max|sqrt(freq) - |amp|| = " + sci(d) + (same ? ", seeded repeat identical" : ", NOT deterministic")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"unary-QFT exactness", c1_uqft},
      {"dense-oracle equivalence", c2_dense},
      {"circuit identities", c3_identities},
      {"layer equivalences", c4_layers},
      {"compound identity", c5_compound},
      {"gradient correctness", c6_gradients},
      {"Burgers desk-scale reproduction", c7_burgers},
      {"complexity accounting", c8_complexity},
      {"parameter-count ordering", c9_params},
      {"measurement estimator", c10_measure},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int passed = 0, run = 0, unexpected = 0;
  for (int i = 0; i < 10; ++i) {
    const int id = i + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++run;
    if (o.pass) {
      ++passed;
    } else if (!kKnownDeviations.count(id)) {
      ++unexpected;
    }
    std::printf("%s %2d %s: %s [%.1f s]%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(), secs,
                !o.pass && kKnownDeviations.count(id) ? " (documented deviation)" : "");
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", passed, run);
  return unexpected == 0 ? 0 : 1;
}
