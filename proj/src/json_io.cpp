#include "qfno/json_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "qfno/error.hpp"

namespace qfno {

using nlohmann::json;

json config_to_json(const QfnoConfig& c) {
  return json{{"variant", to_string(c.variant)},
              {"n_c", c.n_c},
              {"n_s", c.n_s},
              {"k", c.k},
              {"t_layers", c.t_layers},
              {"d_in", c.d_in},
              {"d_out", c.d_out},
              {"nonlinearity", to_string(c.nonlinearity)},
              {"parallel_aggregation", to_string(c.parallel_aggregation)},
              {"classical_policy", to_string(c.classical_policy)},
              {"loss", to_string(c.loss)},
              {"learning_rate", c.learning_rate},
              {"lr_schedule", to_string(c.lr_schedule)},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"epsilon", c.epsilon},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"threads", c.threads}};
}

QfnoConfig config_from_json(const json& j, QfnoConfig c) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedDocument, "config must be a JSON object");
  const json known = config_to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  }
  try {
    auto str = [&](const char* key, auto parse, auto& field) {
      if (j.contains(key)) field = parse(j.at(key).get<std::string>());
    };
    auto num = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    str("variant", parse_variant, c.variant);
    str("nonlinearity", parse_nonlinearity, c.nonlinearity);
    str("parallel_aggregation", parse_aggregation, c.parallel_aggregation);
    str("classical_policy", parse_mode_policy, c.classical_policy);
    str("loss", parse_loss, c.loss);
    str("lr_schedule", parse_lr_schedule, c.lr_schedule);
    num("n_c", c.n_c);
    num("n_s", c.n_s);
    num("k", c.k);
    num("t_layers", c.t_layers);
    num("d_in", c.d_in);
    num("d_out", c.d_out);
    num("learning_rate", c.learning_rate);
    num("beta1", c.beta1);
    num("beta2", c.beta2);
    num("epsilon", c.epsilon);
    num("epochs", c.epochs);
    num("batch_size", c.batch_size);
    num("seed", c.seed);
    num("threads", c.threads);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("bad config value: ") + e.what());
  }
  return c;
}

json matrix_to_json(const RMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

RMatrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::MalformedDocument, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  RMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::MalformedDocument, "ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json complexity_to_json(const ComplexityReport& r) {
  auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
  return json{{"variant", to_string(r.variant)},
              {"qubits", r.qubits},
              {"circuit_count", r.circuit_count},
              {"gate_count", opt(r.gate_count)},
              {"measured_depth", opt(r.measured_depth)},
              {"formula_depth", r.formula_depth},
              {"param_count", r.param_count},
              {"param_layers", opt(r.param_layers)}};
}

std::string model_to_string(const QfnoModel& model) {
  model.check();
  json layers = json::array();
  for (const auto& l : model.params.layers) {
    json w = json::array();
    for (const auto& m : l.weights) w.push_back(matrix_to_json(m));
    layers.push_back(json{{"weights", w}, {"thetas", l.thetas}});
  }
  const json doc{{"schema_version", kModelSchemaVersion},
                 {"config", config_to_json(model.config)},
                 {"P", matrix_to_json(model.params.p)},
                 {"Q", matrix_to_json(model.params.q)},
                 {"layers", layers}};
  return doc.dump(1) + "\n";
}

QfnoModel model_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("model document does not parse: ") + e.what());
  }
  QfnoModel m;
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw Error(ErrorCode::SchemaVersionMismatch, "model schema version " + std::to_string(version) +
                                                        ", this build reads version " +
                                                        std::to_string(kModelSchemaVersion));
    }
    m.config = config_from_json(doc.at("config"));
    m.params.p = matrix_from_json(doc.at("P"));
    m.params.q = matrix_from_json(doc.at("Q"));
    for (const auto& l : doc.at("layers")) {
      QflParams p;
      for (const auto& w : l.at("weights")) p.weights.push_back(matrix_from_json(w));
      p.thetas = l.at("thetas").get<std::vector<ThetaVector>>();
      m.params.layers.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("model document is incomplete: ") + e.what());
  }
  try {
    m.check();
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("model document is inconsistent: ") + e.what());
  }
  return m;
}

void save_model(const QfnoModel& model, const std::filesystem::path& path) {
  const std::string text = model_to_string(model);
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

QfnoModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return model_from_string(ss.str());
}

}  // namespace qfno
