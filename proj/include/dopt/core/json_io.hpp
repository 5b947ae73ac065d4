#pragma once

#include <json.hpp>

#include "dopt/core/types.hpp"

namespace dopt {

// Matrices are row-major nested arrays.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace dopt
