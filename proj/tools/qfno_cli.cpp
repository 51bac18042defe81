// qfno command-line tool. Exit codes: 0 ok, 1 runtime failure, 2 usage error.
// Standard output carries JSON only; progress and diagnostics go to stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "qfno/error.hpp"
#include "qfno/json_io.hpp"
#include "qfno/model.hpp"
#include "qfno/pde.hpp"
#include "qfno/qfl.hpp"
#include "qfno/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qfno;

namespace {

constexpr int kRunConfigSchema = 1;
constexpr int kSummarySchema = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

// ---- gen-burgers -----------------------------------------------------------

struct GenArgs {
  int count = 0;
  int resolution = 256;
  double nu = 0.1;
  double t_end = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  int fine_resolution = 0;
  double dt = 1e-3;
  double amplitude = 25.0;
  double inv_length = 5.0;
  double decay = 2.0;
  int threads = 1;
  std::string format = "auto";
};

void setup_gen(CLI::App& app, GenArgs& a) {
  app.add_option("--count", a.count, "number of (u0, u) pairs")->required();
  app.add_option("--resolution", a.resolution, "output grid points, a power of two")->capture_default_str();
  app.add_option("--nu", a.nu, "viscosity")->capture_default_str();
  app.add_option("--t-end", a.t_end, "final time")->capture_default_str();
  app.add_option("--seed", a.seed, "sampling seed")->capture_default_str();
  app.add_option("--out", a.out, "output file (.bin or .csv)")->required();
  app.add_option("--fine-resolution", a.fine_resolution, "solver grid; 0 picks max(4096, 16 x resolution)")->capture_default_str();
  app.add_option("--dt", a.dt, "solver time step")->capture_default_str();
  app.add_option("--amplitude", a.amplitude, "random field amplitude")->capture_default_str();
  app.add_option("--inv-length", a.inv_length, "random field inverse length scale")->capture_default_str();
  app.add_option("--decay", a.decay, "random field spectral decay exponent")->capture_default_str();
  app.add_option("--threads", a.threads, "worker threads")->capture_default_str();
  app.add_option("--format", a.format, "bin, csv or auto (by extension)")
      ->check(CLI::IsMember({"auto", "bin", "csv"}))
      ->capture_default_str();
}

int run_gen(const GenArgs& a) {
  if (a.count < 0) throw UsageError("count must be non-negative");
  if (!power_of_two(a.resolution)) throw UsageError("resolution must be a power of two");
  if (a.fine_resolution != 0 && (!power_of_two(a.fine_resolution) || a.fine_resolution < a.resolution)) {
    throw UsageError("fine resolution must be a power of two no smaller than the resolution");
  }
  if (!(a.nu > 0.0) || !(a.t_end >= 0.0) || !(a.dt > 0.0)) throw UsageError("need nu > 0, t-end >= 0, dt > 0");
  if (!(a.amplitude >= 0.0) || !(a.inv_length > 0.0) || !(a.decay > 0.0)) {
    throw UsageError("random field parameters must be positive");
  }
  if (a.threads < 1) throw UsageError("threads must be >= 1");

  GrfSpec g{a.resolution, a.amplitude, a.inv_length, a.decay, a.seed};
  BurgersSpec b{a.nu, a.t_end, a.fine_resolution, a.dt};
  const auto start = std::chrono::steady_clock::now();
  const Dataset d = make_dataset(a.count, g, b, a.threads);
  const bool csv = a.format == "csv" || (a.format == "auto" && fs::path(a.out).extension() == ".csv");
  if (csv) {
    export_csv(d, a.out);
  } else {
    write_dataset(d, a.out);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "generated " << a.count << " samples in " << secs << " s\n";

  auto rms = [](const RMatrix& m) { return m.size() ? std::sqrt(m.squaredNorm() / static_cast<double>(m.size())) : 0.0; };
  std::cout << json{{"command", "gen-burgers"},
                    {"out", a.out},
                    {"format", csv ? "csv" : "bin"},
                    {"count", a.count},
                    {"resolution", a.resolution},
                    {"nu", a.nu},
                    {"t_end", a.t_end},
                    {"fine_resolution", d.meta.fine_resolution},
                    {"dt", a.dt},
                    {"seed", a.seed},
                    {"grf", {{"amplitude", a.amplitude}, {"inv_length", a.inv_length}, {"decay", a.decay}}},
                    {"input_rms", rms(d.inputs)},
                    {"target_rms", rms(d.targets)}}
                   .dump()
            << "\n";
  return 0;
}

// ---- train -----------------------------------------------------------------

struct RunConfig {
  QfnoConfig model;
  bool n_s_given = false;
  std::string train_data;
  std::string test_data;
  int n_train = 0;  // 0: every row
  int n_test = 0;   // rows held out (no test file) or taken (test file); 0: all of the test file
  std::string out_dir;
};

json run_config_to_json(const RunConfig& r) {
  json j = config_to_json(r.model);
  j["schema_version"] = kRunConfigSchema;
  j["train_data"] = r.train_data;
  j["test_data"] = r.test_data;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["out_dir"] = r.out_dir;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("run config must be a JSON object");
  RunConfig r;
  json model = json::object();
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "schema_version") {
        if (value.get<int>() != kRunConfigSchema) {
          throw UsageError("run config schema " + value.dump() + ", this build reads " + std::to_string(kRunConfigSchema));
        }
      } else if (key == "train_data") {
        r.train_data = value.get<std::string>();
      } else if (key == "test_data") {
        r.test_data = value.get<std::string>();
      } else if (key == "n_train") {
        r.n_train = value.get<int>();
      } else if (key == "n_test") {
        r.n_test = value.get<int>();
      } else if (key == "out_dir") {
        r.out_dir = value.get<std::string>();
      } else {
        model[key] = value;
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad run config value: ") + e.what());
  }
  r.n_s_given = model.contains("n_s");
  try {
    r.model = config_from_json(model);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return r;
}

struct TrainFlags {
  std::string config_path;
  RunConfig run;
  std::string variant, nonlinearity, aggregation, policy, loss, lr_schedule;
  bool no_timing = false;
};

void setup_train(CLI::App& app, TrainFlags& f) {
  auto& r = f.run;
  auto& m = r.model;
  app.add_option("--config", f.config_path, "RunConfig JSON; flags override its fields");
  app.add_option("--train-data", r.train_data, "training dataset (.bin or .csv)");
  app.add_option("--test-data", r.test_data, "test dataset; without it the last --n-test training rows are held out");
  app.add_option("--n-train", r.n_train, "training rows to use (0: all)");
  app.add_option("--n-test", r.n_test, "test rows");
  app.add_option("--out-dir", r.out_dir, "output directory");
  app.add_option("--variant", f.variant, "classical, sequential, parallel or composite")
      ->check(CLI::IsMember({"classical", "sequential", "parallel", "composite"}));
  app.add_option("--nc", m.n_c, "channels N_c");
  app.add_option("--k", m.k, "transformed modes K");
  app.add_option("--layers", m.t_layers, "Fourier layers");
  app.add_option("--d-in", m.d_in, "input features per point: 1 (value) or 2 (value, coordinate)");
  app.add_option("--nonlinearity", f.nonlinearity, "gelu, relu or none")->check(CLI::IsMember({"gelu", "relu", "none"}));
  app.add_option("--aggregation", f.aggregation, "parallel aggregation: linear, spectral or mean")
      ->check(CLI::IsMember({"linear", "spectral", "mean"}));
  app.add_option("--policy", f.policy, "classical high modes: keep or crop")->check(CLI::IsMember({"keep", "crop"}));
  app.add_option("--loss", f.loss, "relative_l2 or mse")->check(CLI::IsMember({"relative_l2", "mse"}));
  app.add_option("--lr", m.learning_rate, "initial step size");
  app.add_option("--lr-schedule", f.lr_schedule, "cosine or constant")->check(CLI::IsMember({"cosine", "constant"}));
  app.add_option("--beta1", m.beta1, "first moment decay");
  app.add_option("--beta2", m.beta2, "second moment decay");
  app.add_option("--epochs", m.epochs, "epochs");
  app.add_option("--batch-size", m.batch_size, "mini-batch size");
  app.add_option("--seed", m.seed, "initialisation and shuffling seed");
  app.add_option("--threads", m.threads, "worker threads");
  app.add_flag("--no-timing", f.no_timing, "write 0 for wall-clock columns (byte-reproducible outputs)");
}

// Flags given on the command line win over the config file.
RunConfig resolve_run_config(const CLI::App& app, const TrainFlags& f) {
  RunConfig r;
  if (!f.config_path.empty()) {
    std::ifstream is(f.config_path);
    if (!is) throw UsageError("cannot open run config " + f.config_path);
    json j;
    try {
      j = json::parse(is);
    } catch (const json::exception& e) {
      throw UsageError(std::string("run config does not parse: ") + e.what());
    }
    r = run_config_from_json(j);
  }
  auto given = [&](const char* name) { return app.count(name) > 0; };
  const RunConfig& fr = f.run;
  if (given("--train-data")) r.train_data = fr.train_data;
  if (given("--test-data")) r.test_data = fr.test_data;
  if (given("--n-train")) r.n_train = fr.n_train;
  if (given("--n-test")) r.n_test = fr.n_test;
  if (given("--out-dir")) r.out_dir = fr.out_dir;
  if (given("--nc")) r.model.n_c = fr.model.n_c;
  if (given("--k")) r.model.k = fr.model.k;
  if (given("--layers")) r.model.t_layers = fr.model.t_layers;
  if (given("--d-in")) r.model.d_in = fr.model.d_in;
  if (given("--lr")) r.model.learning_rate = fr.model.learning_rate;
  if (given("--beta1")) r.model.beta1 = fr.model.beta1;
  if (given("--beta2")) r.model.beta2 = fr.model.beta2;
  if (given("--epochs")) r.model.epochs = fr.model.epochs;
  if (given("--batch-size")) r.model.batch_size = fr.model.batch_size;
  if (given("--seed")) r.model.seed = fr.model.seed;
  if (given("--threads")) r.model.threads = fr.model.threads;
  if (given("--variant")) r.model.variant = parse_variant(f.variant);
  if (given("--nonlinearity")) r.model.nonlinearity = parse_nonlinearity(f.nonlinearity);
  if (given("--aggregation")) r.model.parallel_aggregation = parse_aggregation(f.aggregation);
  if (given("--policy")) r.model.classical_policy = parse_mode_policy(f.policy);
  if (given("--loss")) r.model.loss = parse_loss(f.loss);
  if (given("--lr-schedule")) r.model.lr_schedule = parse_lr_schedule(f.lr_schedule);
  if (r.train_data.empty()) throw UsageError("--train-data is required");
  if (r.out_dir.empty()) throw UsageError("--out-dir is required");
  if (r.n_train < 0 || r.n_test < 0) throw UsageError("row counts must be non-negative");
  if (r.test_data.empty() && r.n_test == 0) throw UsageError("give --test-data or hold out rows with --n-test");
  return r;
}

Dataset load_any(const std::string& path) {
  return fs::path(path).extension() == ".csv" ? import_csv(path) : read_dataset(path);
}

int run_train(const CLI::App& app, const TrainFlags& f) {
  RunConfig r = resolve_run_config(app, f);

  Dataset all = load_any(r.train_data);
  Dataset train_set, test_set;
  if (r.test_data.empty()) {
    if (r.n_test >= all.count()) throw UsageError("--n-test leaves no training rows");
    const int avail = all.count() - r.n_test;
    const int n = r.n_train > 0 ? r.n_train : avail;
    if (n > avail) throw UsageError("--n-train exceeds the available rows");
    train_set = all.slice(0, n);
    test_set = all.slice(avail, r.n_test);
  } else {
    const Dataset test_all = load_any(r.test_data);
    const int n = r.n_train > 0 ? r.n_train : all.count();
    const int m = r.n_test > 0 ? r.n_test : test_all.count();
    if (n > all.count() || m > test_all.count()) throw UsageError("requested more rows than the datasets hold");
    train_set = all.slice(0, n);
    test_set = test_all.slice(0, m);
  }
  if (r.n_s_given && r.model.n_s != train_set.resolution()) {
    throw UsageError("n_s = " + std::to_string(r.model.n_s) + " but the data has resolution " +
                     std::to_string(train_set.resolution()));
  }
  r.model.n_s = train_set.resolution();
  if (test_set.resolution() != r.model.n_s) throw UsageError("train and test resolutions differ");
  try {
    r.model.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const fs::path out = r.out_dir;
  fs::create_directories(out);
  write_text(out / "run_config.json", run_config_to_json(r).dump(1) + "\n");

  QfnoModel model = QfnoModel::init(r.model);
  std::ostringstream metrics;
  metrics << "epoch,train_loss,test_rel_err,seconds\n";
  TrainOptions opts;
  opts.record_time = !f.no_timing;
  opts.on_epoch = [&](const EpochRecord& e) {
    metrics << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.test_rel_err) << ',' << fmt(e.seconds) << '\n';
    std::cerr << "epoch " << e.epoch << " train " << e.train_loss << " test " << e.test_rel_err << "\n";
  };
  const auto start = std::chrono::steady_clock::now();
  const TrainReport rep = train(model, train_set, test_set, opts);
  const double secs = f.no_timing ? 0.0 : std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  save_model(model, out / "model.json");
  write_text(out / "metrics.csv", metrics.str());
  const QflConfig lc = r.model.layer_config();
  const json summary{{"schema_version", kSummarySchema},
                     {"variant", to_string(r.model.variant)},
                     {"train_count", train_set.count()},
                     {"test_count", test_set.count()},
                     {"epochs", rep.epochs.size()},
                     {"final_train_loss", rep.final_train_loss},
                     {"final_test_rel_err", rep.final_test_rel_err},
                     {"output_reduction", "real part"},
                     {"mean_imag_ratio", rep.mean_imag_ratio},
                     {"param_count", param_count(lc)},
                     {"model_param_count", model.params.size()},
                     {"complexity_report", complexity_to_json(complexity_report(lc))},
                     {"seconds", secs}};
  write_text(out / "summary.json", summary.dump(1) + "\n");
  std::cout << summary.dump() << "\n";
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string model, data;
  int offset = 0, count = 0;
  int threads = 1;
};

int run_eval(const EvalArgs& a) {
  const QfnoModel loaded = load_model(a.model);
  QfnoModel model = loaded;
  model.config.threads = a.threads;
  const Dataset all = load_any(a.data);
  const int n = a.count > 0 ? a.count : all.count() - a.offset;
  if (a.offset < 0 || n < 1 || a.offset + n > all.count()) throw UsageError("row range is outside the dataset");
  const Dataset d = all.slice(a.offset, n);
  const double err = evaluate(model, d);
  std::cout << json{{"command", "eval"}, {"variant", to_string(model.config.variant)}, {"count", n}, {"relative_error", err}}.dump()
            << "\n";
  return 0;
}

// ---- verify / report-complexity -------------------------------------------

int run_verify(const std::string& suite, std::uint64_t seed) {
  const SuiteReport r = run_verify_suite(suite, seed);
  std::cout << to_json(r).dump(1) << "\n";
  for (const auto& p : r.properties) {
    std::cerr << (p.informational ? "info " : p.pass ? "pass " : "FAIL ") << p.name << "  (max residual " << p.max_residual
              << ")\n";
  }
  if (const auto* f = r.first_failure()) {
    std::cerr << "first failing property: " << f->name << "\n";
    return 1;
  }
  return 0;
}

struct ComplexityArgs {
  int nc = 8, ns = 64, k = 4;
  std::string variant = "all";
  std::string aggregation = "linear";
};

int run_complexity(const ComplexityArgs& a) {
  std::vector<Variant> variants;
  if (a.variant == "all") {
    variants = {Variant::Classical, Variant::Sequential, Variant::Parallel, Variant::Composite};
  } else {
    variants = {parse_variant(a.variant)};
  }
  json rows = json::array();
  for (Variant v : variants) {
    QflConfig c;
    c.n_c = a.nc;
    c.n_s = a.ns;
    c.k = a.k;
    c.variant = v;
    c.aggregation = parse_aggregation(a.aggregation);
    try {
      c.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    json row = complexity_to_json(complexity_report(c));
    row["n_c"] = a.nc;
    row["n_s"] = a.ns;
    row["k"] = a.k;
    rows.push_back(row);
  }
  std::cout << rows.dump(1) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier neural operators with quantum-circuit layers: data, training, verification"};
  app.require_subcommand(1);

  GenArgs gen;
  setup_gen(*app.add_subcommand("gen-burgers", "generate a Burgers dataset"), gen);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "train a model and write model.json, metrics.csv, summary.json");
  setup_train(*train_cmd, tf);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "relative error of a checkpoint on a dataset");
  eval_cmd->add_option("--model", ev.model, "model.json")->required();
  eval_cmd->add_option("--data", ev.data, "dataset (.bin or .csv)")->required();
  eval_cmd->add_option("--offset", ev.offset, "first row");
  eval_cmd->add_option("--count", ev.count, "rows (0: to the end)");
  eval_cmd->add_option("--threads", ev.threads, "worker threads");

  std::string suite = "all";
  std::uint64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "run an invariant suite");
  verify_cmd->add_option("--suite", suite, "core, uqft, layers, equiv, grad or all")
      ->check(CLI::IsMember(verify_suite_names()))
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify_seed, "random draws seed")->capture_default_str();

  ComplexityArgs cx;
  auto* cx_cmd = app.add_subcommand("report-complexity", "qubits, circuits, gates and depth per variant");
  cx_cmd->add_option("--nc", cx.nc, "N_c")->capture_default_str();
  cx_cmd->add_option("--ns", cx.ns, "N_s")->capture_default_str();
  cx_cmd->add_option("--k", cx.k, "K")->capture_default_str();
  cx_cmd->add_option("--variant", cx.variant, "classical, sequential, parallel, composite or all")
      ->check(CLI::IsMember({"all", "classical", "sequential", "parallel", "composite"}))
      ->capture_default_str();
  cx_cmd->add_option("--aggregation", cx.aggregation, "parallel aggregation")
      ->check(CLI::IsMember({"linear", "spectral", "mean"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand("gen-burgers")) return run_gen(gen);
    if (app.got_subcommand("train")) return run_train(*train_cmd, tf);
    if (app.got_subcommand("eval")) return run_eval(ev);
    if (app.got_subcommand("verify")) return run_verify(suite, verify_seed);
    if (app.got_subcommand("report-complexity")) return run_complexity(cx);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
