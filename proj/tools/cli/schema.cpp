#include "cli/schema.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "cli/scenario.hpp"

namespace isocluster::cli {

namespace {

const std::set<std::string> kKnown = {"$schema", "$id",  "$defs",      "title",   "description",
                                      "type",    "enum", "const",      "properties", "required",
                                      "additionalProperties", "items", "minItems", "maxItems",
                                      "minimum", "maximum", "$ref", "oneOf", "anyOf"};

bool has_type(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  throw std::invalid_argument("schema: unknown type '" + t + "'");
}

class Validator {
 public:
  explicit Validator(const json& root) : root_(root) {}

  void check(const json& s, const json& v, const std::string& at, std::vector<std::string>& errs) const {
    if (s.is_boolean()) {
      if (!s.get<bool>()) errs.push_back(at + ": not allowed");
      return;
    }
    if (!s.is_object()) throw std::invalid_argument("schema: subschema at " + at + " is not an object");
    for (auto it = s.begin(); it != s.end(); ++it)
      if (!kKnown.count(it.key())) throw std::invalid_argument("schema: unsupported keyword '" + it.key() + "'");

    if (auto r = s.find("$ref"); r != s.end()) check(resolve(r->get<std::string>()), v, at, errs);
    if (auto t = s.find("type"); t != s.end()) {
      bool ok = false;
      if (t->is_array()) {
        for (const auto& x : *t) ok = ok || has_type(v, x.get<std::string>());
      } else {
        ok = has_type(v, t->get<std::string>());
      }
      if (!ok) {
        errs.push_back(at + ": expected type " + t->dump());
        return;
      }
    }
    if (auto e = s.find("enum"); e != s.end()) {
      bool ok = false;
      for (const auto& x : *e) ok = ok || x == v;
      if (!ok) errs.push_back(at + ": value not in enum");
    }
    if (auto c = s.find("const"); c != s.end() && *c != v) errs.push_back(at + ": expected " + c->dump());
    if (v.is_number()) {
      if (auto m = s.find("minimum"); m != s.end() && v.get<double>() < m->get<double>())
        errs.push_back(at + ": below minimum");
      if (auto m = s.find("maximum"); m != s.end() && v.get<double>() > m->get<double>())
        errs.push_back(at + ": above maximum");
    }
    if (v.is_object()) {
      const json* props = s.contains("properties") ? &s["properties"] : nullptr;
      if (auto r = s.find("required"); r != s.end())
        for (const auto& k : *r)
          if (!v.contains(k.get<std::string>())) errs.push_back(at + ": missing '" + k.get<std::string>() + "'");
      for (auto it = v.begin(); it != v.end(); ++it) {
        const std::string child = at + "/" + pointer_escape(it.key());
        if (props && props->contains(it.key())) {
          check((*props)[it.key()], it.value(), child, errs);
        } else if (auto ap = s.find("additionalProperties"); ap != s.end()) {
          check(*ap, it.value(), child, errs);
        }
      }
    }
    if (v.is_array()) {
      if (auto m = s.find("minItems"); m != s.end() && v.size() < m->get<std::size_t>())
        errs.push_back(at + ": too few items");
      if (auto m = s.find("maxItems"); m != s.end() && v.size() > m->get<std::size_t>())
        errs.push_back(at + ": too many items");
      if (auto items = s.find("items"); items != s.end())
        for (std::size_t i = 0; i < v.size(); ++i) check(*items, v[i], at + "/" + std::to_string(i), errs);
    }
    if (auto o = s.find("oneOf"); o != s.end()) {
      int matches = 0;
      for (const auto& sub : *o) {
        std::vector<std::string> tmp;
        check(sub, v, at, tmp);
        matches += tmp.empty();
      }
      if (matches != 1) errs.push_back(at + ": matches " + std::to_string(matches) + " oneOf branches");
    }
    if (auto o = s.find("anyOf"); o != s.end()) {
      bool any = false;
      for (const auto& sub : *o) {
        std::vector<std::string> tmp;
        check(sub, v, at, tmp);
        any = any || tmp.empty();
      }
      if (!any) errs.push_back(at + ": matches no anyOf branch");
    }
  }

 private:
  const json& resolve(const std::string& ref) const {
    if (ref.rfind("#", 0) != 0) throw std::invalid_argument("schema: only local $ref is supported: " + ref);
    const json::json_pointer ptr(ref.substr(1));
    if (!root_.contains(ptr)) throw std::invalid_argument("schema: dangling $ref " + ref);
    return root_.at(ptr);
  }

  const json& root_;
};

}  // namespace

std::vector<std::string> validate_schema(const json& schema, const json& doc) {
  std::vector<std::string> errs;
  Validator(schema).check(schema, doc, "", errs);
  return errs;
}

}  // namespace isocluster::cli
