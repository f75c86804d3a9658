#pragma once

// JSON helpers shared by the serialization code. Floats are written with 17
// significant digits so that doubles round-trip exactly.

#include <string>

#include <json.hpp>

#include "romfcc/linalg.hpp"

namespace romfcc::detail {

using Json = nlohmann::ordered_json;

std::string dump(const Json& j);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);  // array of rows
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);

/// Parses JSON text; throws io-error on malformed input.
Json parse(const std::string& text, const std::string& what);

}  // namespace romfcc::detail
