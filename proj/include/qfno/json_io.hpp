#pragma once

#include <json.hpp>

#include "qfno/model.hpp"
#include "qfno/qfl.hpp"

namespace qfno {

nlohmann::json config_to_json(const QfnoConfig& c);
/// Missing keys keep their defaults; unknown keys raise InvalidArgument.
QfnoConfig config_from_json(const nlohmann::json& j, QfnoConfig base = {});

nlohmann::json matrix_to_json(const RMatrix& m);
RMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json complexity_to_json(const ComplexityReport& r);

}  // namespace qfno
