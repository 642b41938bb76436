#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace isocluster::cli {

// Validates `doc` against a JSON Schema using the keywords the report schema
// needs: type, enum, const, properties, required, additionalProperties,
// items, minItems, maxItems, minimum, maximum, $ref (local "#/..." only),
// oneOf and anyOf. Unsupported keywords are errors so nothing passes by
// accident. Returns one message per violation, prefixed with the instance
// pointer.
std::vector<std::string> validate_schema(const nlohmann::json& schema, const nlohmann::json& doc);

}  // namespace isocluster::cli
