#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "qfno/error.hpp"
#include "qfno/json_io.hpp"
#include "qfno/measure.hpp"
#include "qfno/model.hpp"
#include "qfno/parlayers.hpp"
#include "qfno/pde.hpp"
#include "qfno/qfl.hpp"
#include "qfno/uqft.hpp"
#include "qfno/verify.hpp"

namespace py = pybind11;
using namespace qfno;
using nlohmann::json;

namespace {

Layout make_layout(const std::string& shape, int n) {
  if (shape == "butterfly") return Layout::butterfly(n);
  if (shape == "butterfly_padded") return Layout::butterfly_padded(n);
  if (shape == "pyramid") return Layout::pyramid(n);
  throw Error(ErrorCode::InvalidArgument, "layout must be butterfly, butterfly_padded or pyramid");
}

QflConfig layer_config(int n_c, int n_s, int k, const std::string& variant, const std::string& policy,
                       const std::string& aggregation) {
  QflConfig c;
  c.n_c = n_c;
  c.n_s = n_s;
  c.k = k;
  c.variant = parse_variant(variant);
  c.policy = parse_mode_policy(policy);
  c.aggregation = parse_aggregation(aggregation);
  c.validate();
  return c;
}

Dataset make_data(const RMatrix& inputs, const RMatrix& targets) {
  Dataset d;
  d.inputs = inputs;
  d.targets = targets;
  d.grid = unit_grid(static_cast<int>(inputs.cols()));
  d.check();
  return d;
}

py::dict dataset_dict(const Dataset& d) {
  py::dict out;
  out["inputs"] = d.inputs;
  out["targets"] = d.targets;
  out["grid"] = d.grid;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Compiled core of the qfno package";
  py::register_exception<Error>(m, "QfnoError", PyExc_RuntimeError);

  // Circuits and transforms.
  m.def("dft_matrix", [](int n) { return dft_matrix(n).f; }, py::arg("n"));
  m.def("bit_reversal_permutation", &bit_reversal_permutation, py::arg("n"));
  m.def(
      "uqft_matrix",
      [](int n, bool inverse) { return restricted_matrix(build_uqft(n, inverse), Sector::Hw1); },
      py::arg("n"), py::arg("inverse") = false, "Weight-1 restriction of the unary QFT circuit.");
  m.def(
      "param_circuit_matrix",
      [](const std::string& shape, int n, const ThetaVector& theta, int weight) {
        const Circuit c = build_param_circuit(make_layout(shape, n), theta);
        return restricted_matrix(c, weight == 2 ? Sector::Hw2 : Sector::Hw1);
      },
      py::arg("shape"), py::arg("n"), py::arg("theta"), py::arg("weight") = 1);
  m.def(
      "unary_weight", [](const std::string& shape, int n, const ThetaVector& theta) { return unary_weight(make_layout(shape, n), theta); },
      py::arg("shape"), py::arg("n"), py::arg("theta"));
  m.def(
      "slot_count", [](const std::string& shape, int n) { return make_layout(shape, n).slot_count(); }, py::arg("shape"),
      py::arg("n"));
  m.def("compound_order2", &compound_order2, py::arg("w"));
  m.def(
      "measure_sample",
      [](const CMatrix& amps, std::int64_t shots, std::uint64_t seed) { return measure_sample(PairState{amps}, shots, seed); },
      py::arg("amps"), py::arg("shots"), py::arg("seed"));

  // Layers.
  m.def(
      "classical_fourier_layer",
      [](const CMatrix& a, const std::vector<RMatrix>& weights, int k, const std::string& policy) {
        return classical_fourier_layer(a, weights, k, parse_mode_policy(policy));
      },
      py::arg("a"), py::arg("weights"), py::arg("k"), py::arg("policy") = "keep");
  m.def(
      "apply_layer",
      [](const CMatrix& a, const std::vector<RMatrix>& weights, const std::vector<ThetaVector>& thetas, int k,
         const std::string& variant, const std::string& policy, const std::string& aggregation) {
        const QflConfig c = layer_config(static_cast<int>(a.rows()), static_cast<int>(a.cols()), k, variant, policy, aggregation);
        QflParams p{weights, thetas};
        p.check(c);
        return apply_layer(a, p, c);
      },
      py::arg("a"), py::arg("weights"), py::arg("thetas"), py::arg("k"), py::arg("variant"), py::arg("policy") = "keep",
      py::arg("aggregation") = "linear");
  m.def(
      "complexity_report_json",
      [](int n_c, int n_s, int k, const std::string& variant) {
        return complexity_to_json(complexity_report(layer_config(n_c, n_s, k, variant, "keep", "linear"))).dump();
      },
      py::arg("n_c"), py::arg("n_s"), py::arg("k"), py::arg("variant"));

  // Data.
  m.def(
      "grf_sample",
      [](int resolution, std::uint64_t seed, std::uint64_t index, double amplitude, double inv_length, double decay) {
        return grf_sample(GrfSpec{resolution, amplitude, inv_length, decay, seed}, index);
      },
      py::arg("resolution"), py::arg("seed") = 0, py::arg("index") = 0, py::arg("amplitude") = 25.0,
      py::arg("inv_length") = 5.0, py::arg("decay") = 2.0);
  m.def(
      "burgers_solve",
      [](const RVector& u0, double nu, double t_end, int fine_resolution, double dt) {
        return burgers_solve(u0, BurgersSpec{nu, t_end, fine_resolution, dt});
      },
      py::arg("u0"), py::arg("nu") = 0.1, py::arg("t_end") = 1.0, py::arg("fine_resolution") = 0, py::arg("dt") = 1e-3);
  m.def(
      "make_dataset",
      [](int count, int resolution, std::uint64_t seed, double nu, double t_end, int fine_resolution, int threads) {
        GrfSpec g;
        g.resolution = resolution;
        g.seed = seed;
        py::gil_scoped_release release;
        Dataset d = make_dataset(count, g, BurgersSpec{nu, t_end, fine_resolution, 1e-3}, threads);
        py::gil_scoped_acquire acquire;
        return dataset_dict(d);
      },
      py::arg("count"), py::arg("resolution") = 256, py::arg("seed") = 0, py::arg("nu") = 0.1, py::arg("t_end") = 1.0,
      py::arg("fine_resolution") = 0, py::arg("threads") = 1);
  m.def(
      "read_dataset", [](const std::string& path) { return dataset_dict(read_dataset(path)); }, py::arg("path"));
  m.def(
      "write_dataset",
      [](const RMatrix& inputs, const RMatrix& targets, const std::string& path) { write_dataset(make_data(inputs, targets), path); },
      py::arg("inputs"), py::arg("targets"), py::arg("path"));

  // Model.
  py::class_<QfnoModel>(m, "_Model")
      .def(py::init([](const std::string& config_json) {
             return QfnoModel::init(config_from_json(json::parse(config_json)));
           }),
           py::arg("config_json"))
      .def_static("from_json", &model_from_string, py::arg("text"))
      .def_static("load", [](const std::string& path) { return load_model(path); }, py::arg("path"))
      .def("to_json", &model_to_string)
      .def("save", [](const QfnoModel& self, const std::string& path) { save_model(self, path); }, py::arg("path"))
      .def("config_json", [](const QfnoModel& self) { return config_to_json(self.config).dump(); })
      .def("get_params", [](const QfnoModel& self) { return self.params.flatten(); })
      .def("set_params", [](QfnoModel& self, const std::vector<double>& x) { self.params.assign(x); }, py::arg("x"))
      .def(
          "forward",
          [](const QfnoModel& self, const RVector& u0) {
            const Prediction p = forward(self, u0, unit_grid(static_cast<int>(u0.size())));
            return py::make_tuple(p.values, p.imag_ratio);
          },
          py::arg("u0"))
      .def(
          "evaluate", [](const QfnoModel& self, const RMatrix& x, const RMatrix& y) { return evaluate(self, make_data(x, y)); },
          py::arg("inputs"), py::arg("targets"))
      .def(
          "grad",
          [](const QfnoModel& self, const RMatrix& x, const RMatrix& y) {
            const Dataset d = make_data(x, y);
            std::vector<int> rows(static_cast<std::size_t>(d.count()));
            for (int i = 0; i < d.count(); ++i) rows[static_cast<std::size_t>(i)] = i;
            const GradResult g = grad(self, d, rows);
            return py::make_tuple(g.loss, g.grad.flatten());
          },
          py::arg("inputs"), py::arg("targets"))
      .def(
          "train",
          [](QfnoModel& self, const RMatrix& xtr, const RMatrix& ytr, const RMatrix& xte, const RMatrix& yte, bool timing) {
            const Dataset tr = make_data(xtr, ytr), te = make_data(xte, yte);
            TrainOptions opts;
            opts.record_time = timing;
            TrainReport r;
            {
              py::gil_scoped_release release;
              r = train(self, tr, te, opts);
            }
            py::list epochs;
            for (const auto& e : r.epochs) {
              py::dict d;
              d["epoch"] = e.epoch;
              d["train_loss"] = e.train_loss;
              d["test_rel_err"] = e.test_rel_err;
              d["seconds"] = e.seconds;
              epochs.append(d);
            }
            py::dict out;
            out["epochs"] = epochs;
            out["final_train_loss"] = r.final_train_loss;
            out["final_test_rel_err"] = r.final_test_rel_err;
            out["mean_imag_ratio"] = r.mean_imag_ratio;
            return out;
          },
          py::arg("train_inputs"), py::arg("train_targets"), py::arg("test_inputs"), py::arg("test_targets"),
          py::arg("timing") = true);

  m.def("relative_l2", &relative_l2, py::arg("pred"), py::arg("target"));
  m.def(
      "verify_json", [](const std::string& suite, std::uint64_t seed) { return to_json(run_verify_suite(suite, seed)).dump(); },
      py::arg("suite") = "all", py::arg("seed") = 0);
}
