#include "schema.hpp"

namespace gpb::cli {

namespace {

using json = nlohmann::json;

bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>()));
  }
  return false;
}

class Validator {
 public:
  explicit Validator(const json& root) : root_(root) {}

  void check(const json& s, const json& v, const std::string& path) {
    if (s.contains("$ref")) {
      check(resolve(s["$ref"].get<std::string>()), v, path);
      return;
    }
    if (s.contains("type")) {
      bool ok = false;
      std::string names;
      const json types = s["type"].is_array() ? s["type"] : json::array({s["type"]});
      for (const auto& t : types) {
        ok = ok || has_type(v, t.get<std::string>());
        names += (names.empty() ? "" : " or ") + t.get<std::string>();
      }
      if (!ok) {
        fail(path, "expected " + names);
        return;
      }
    }
    if (s.contains("enum")) {
      bool found = false;
      for (const auto& e : s["enum"]) found = found || e == v;
      if (!found) fail(path, "value " + v.dump() + " not in " + s["enum"].dump());
    }
    if (v.is_number()) {
      const double x = v.get<double>();
      if (s.contains("minimum") && x < s["minimum"].get<double>())
        fail(path, "must be >= " + s["minimum"].dump());
      if (s.contains("maximum") && x > s["maximum"].get<double>())
        fail(path, "must be <= " + s["maximum"].dump());
      if (s.contains("exclusiveMinimum") && x <= s["exclusiveMinimum"].get<double>())
        fail(path, "must be > " + s["exclusiveMinimum"].dump());
    }
    if (v.is_string() && s.contains("minLength") && v.get<std::string>().size() < s["minLength"].get<std::size_t>())
      fail(path, "string too short");
    if (v.is_array()) {
      if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>())
        fail(path, "needs at least " + s["minItems"].dump() + " items");
      if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>())
        fail(path, "allows at most " + s["maxItems"].dump() + " items");
      if (s.contains("items"))
        for (std::size_t i = 0; i < v.size(); ++i) check(s["items"], v[i], path + "/" + std::to_string(i));
    }
    if (v.is_object()) {
      if (s.contains("required"))
        for (const auto& r : s["required"])
          if (!v.contains(r.get<std::string>())) fail(path, "missing required property '" + r.get<std::string>() + "'");
      const json props = s.value("properties", json::object());
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (props.contains(it.key())) {
          check(props[it.key()], it.value(), path + "/" + it.key());
        } else if (s.contains("additionalProperties") && s["additionalProperties"] == false) {
          fail(path, "unknown property '" + it.key() + "'");
        }
      }
    }
  }

  std::vector<std::string> errors;

 private:
  const json& resolve(const std::string& ref) {
    if (ref.rfind("#/", 0) != 0) throw std::runtime_error("unsupported $ref " + ref);
    const json* node = &root_;
    std::size_t pos = 2;
    while (pos <= ref.size()) {
      const std::size_t next = ref.find('/', pos);
      const std::string key = ref.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      node = &node->at(key);
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    return *node;
  }

  void fail(const std::string& path, const std::string& what) {
    errors.push_back((path.empty() ? "/" : path) + ": " + what);
  }

  const json& root_;
};

}  // namespace

std::vector<std::string> validate_schema(const nlohmann::json& schema, const nlohmann::json& doc) {
  Validator v(schema);
  v.check(schema, doc, "");
  return v.errors;
}

}  // namespace gpb::cli
