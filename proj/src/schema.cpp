// Copyright 2026 The Tripsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <set>
#include <string>

#include "tripsynth/data.hpp"
#include "tripsynth/error.hpp"

namespace tripsynth::data {
namespace {

const char* kind_name(VarKind k) {
  switch (k) {
    case VarKind::kNumeric: return "numeric";
    case VarKind::kBinary: return "binary";
    case VarKind::kCategorical: return "categorical";
    case VarKind::kGeospatial: return "geospatial";
  }
  return "?";
}

VarKind kind_from_name(const std::string& s) {
  if (s == "numeric") return VarKind::kNumeric;
  if (s == "binary") return VarKind::kBinary;
  if (s == "categorical") return VarKind::kCategorical;
  if (s == "geospatial") return VarKind::kGeospatial;
  throw SchemaError("unknown variable kind: " + s);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string bin_label(double lo, double hi, bool last) {
  return "[" + format_double(lo) + "," + format_double(hi) +
         (last ? "]" : ")");
}

const VariableSpec* SurveySchema::find(const std::string& name) const {
  for (const VariableSpec& v : vars) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

std::vector<const VariableSpec*> SurveySchema::person_vars() const {
  std::vector<const VariableSpec*> out;
  for (const VariableSpec& v : vars) {
    if (v.role == VarRole::kPerson) out.push_back(&v);
  }
  return out;
}

std::vector<const VariableSpec*> SurveySchema::trip_vars() const {
  std::vector<const VariableSpec*> out;
  for (const VariableSpec& v : vars) {
    if (v.role == VarRole::kTrip) out.push_back(&v);
  }
  return out;
}

std::size_t SurveySchema::person_index(const std::string& name) const {
  std::size_t i = 0;
  for (const VariableSpec& v : vars) {
    if (v.role != VarRole::kPerson) continue;
    if (v.name == name) return i;
    ++i;
  }
  throw SchemaError("no person variable named " + name);
}

void SurveySchema::validate() const {
  if (id_column.empty()) throw SchemaError("id column name must be nonempty");
  std::set<std::string> seen{id_column};
  for (const VariableSpec& v : vars) {
    if (v.name.empty()) throw SchemaError("variable names must be nonempty");
    if (!seen.insert(v.name).second) {
      throw SchemaError("duplicate variable name: " + v.name);
    }
    if (v.is_label_kind()) {
      if (v.labels.empty()) {
        throw SchemaError("variable " + v.name + " declares no categories");
      }
      if (v.kind == VarKind::kBinary && v.labels.size() != 2) {
        throw SchemaError("binary variable " + v.name +
                          " must declare exactly two categories");
      }
      std::set<std::string> lseen;
      for (const std::string& l : v.labels) {
        if (!lseen.insert(l).second) {
          throw SchemaError("variable " + v.name + " repeats category " + l);
        }
      }
    } else {
      if (!(v.min < v.max)) {
        throw SchemaError("variable " + v.name + " needs min < max");
      }
      for (std::size_t i = 1; i < v.bin_edges.size(); ++i) {
        if (!(v.bin_edges[i - 1] < v.bin_edges[i])) {
          throw SchemaError("variable " + v.name +
                            " bin edges must be strictly increasing");
        }
      }
    }
  }
  const auto pv = person_vars();
  if (pv.empty()) throw SchemaError("schema needs at least one person variable");
  const auto tv = trip_vars();
  if (tv.size() != 5) {
    throw SchemaError("schema needs exactly five trip variables, got " +
                      std::to_string(tv.size()));
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (tv[i]->kind != VarKind::kGeospatial) {
      throw SchemaError("trip variable " + tv[i]->name +
                        " must be geospatial (coordinate order ox,oy,dx,dy)");
    }
  }
  if (tv[4]->kind != VarKind::kCategorical) {
    throw SchemaError("trip variable " + tv[4]->name +
                      " must be the categorical purpose");
  }
  if (purpose_var != tv[4]->name) {
    throw SchemaError("purpose_var must name the trip purpose variable");
  }
  for (const std::string& l : tv[4]->labels) {
    if (l == kEndLabel) {
      throw SchemaError(std::string("purpose label ") + kEndLabel +
                        " is reserved");
    }
  }
  auto check_home = [&](const std::string& name) {
    const VariableSpec* v = find(name);
    if (v == nullptr || v->role != VarRole::kPerson ||
        v->kind != VarKind::kGeospatial) {
      throw SchemaError("home coordinate " + name +
                        " must be a person geospatial variable");
    }
  };
  check_home(home_x);
  check_home(home_y);
}

nlohmann::ordered_json schema_to_json(const SurveySchema& s) {
  nlohmann::ordered_json j;
  j["id_column"] = s.id_column;
  j["home_x"] = s.home_x;
  j["home_y"] = s.home_y;
  j["purpose_var"] = s.purpose_var;
  j["variables"] = nlohmann::ordered_json::array();
  for (const VariableSpec& v : s.vars) {
    nlohmann::ordered_json vj;
    vj["name"] = v.name;
    vj["kind"] = kind_name(v.kind);
    vj["role"] = v.role == VarRole::kPerson ? "person" : "trip";
    if (v.is_label_kind()) {
      vj["labels"] = v.labels;
    } else {
      vj["min"] = v.min;
      vj["max"] = v.max;
      if (!v.bin_edges.empty()) vj["bin_edges"] = v.bin_edges;
    }
    j["variables"].push_back(std::move(vj));
  }
  return j;
}

SurveySchema schema_from_json(const nlohmann::json& j) {
  SurveySchema s;
  try {
    s.id_column = j.at("id_column").get<std::string>();
    s.home_x = j.at("home_x").get<std::string>();
    s.home_y = j.at("home_y").get<std::string>();
    s.purpose_var = j.at("purpose_var").get<std::string>();
    for (const auto& vj : j.at("variables")) {
      VariableSpec v;
      v.name = vj.at("name").get<std::string>();
      v.kind = kind_from_name(vj.at("kind").get<std::string>());
      const std::string role = vj.at("role").get<std::string>();
      if (role != "person" && role != "trip") {
        throw SchemaError("unknown variable role: " + role);
      }
      v.role = role == "person" ? VarRole::kPerson : VarRole::kTrip;
      if (v.is_label_kind()) {
        v.labels = vj.at("labels").get<std::vector<std::string>>();
      } else {
        v.min = vj.at("min").get<double>();
        v.max = vj.at("max").get<double>();
        if (vj.contains("bin_edges")) {
          v.bin_edges = vj.at("bin_edges").get<std::vector<double>>();
        }
      }
      s.vars.push_back(std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema json: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace tripsynth::data
