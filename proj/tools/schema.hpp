#ifndef GPB_TOOLS_SCHEMA_HPP
#define GPB_TOOLS_SCHEMA_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace gpb::cli {

/// Validates against the JSON-Schema subset used by the scenario schema: type, enum,
/// required, properties, additionalProperties (boolean), items, min/maxItems,
/// minLength, minimum, maximum, exclusiveMinimum and local $ref. Returns one
/// message per violation, each prefixed by its JSON pointer.
std::vector<std::string> validate_schema(const nlohmann::json& schema, const nlohmann::json& doc);

}  // namespace gpb::cli

#endif  // GPB_TOOLS_SCHEMA_HPP
