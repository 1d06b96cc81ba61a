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
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "tripsynth/data.hpp"
#include "tripsynth/error.hpp"

namespace tripsynth::data {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double x = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  const auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e) {
    throw ValueError("cannot parse number '" + s + "' in " + where);
  }
  return x;
}

}  // namespace

void write_diary_csv(const std::filesystem::path& path,
                     const SurveySchema& schema,
                     const std::vector<RawRecord>& records) {
  std::ostringstream out;
  out << schema.id_column;
  for (const VariableSpec& v : schema.vars) out << ',' << v.name;
  out << '\n';

  const auto pv = schema.person_vars();
  for (const RawRecord& r : records) {
    if (r.person.size() != pv.size()) {
      throw SchemaError("record " + r.id + " carries " +
                        std::to_string(r.person.size()) +
                        " person values, schema declares " +
                        std::to_string(pv.size()));
    }
    std::string prefix = r.id;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      prefix.push_back(',');
      if (const double* x = std::get_if<double>(&r.person[i])) {
        prefix += format_double(*x);
      } else {
        prefix += std::get<std::string>(r.person[i]);
      }
    }
    for (const Trip& t : r.trips) {
      out << prefix << ',' << format_double(t.ox) << ',' << format_double(t.oy)
          << ',' << format_double(t.dx) << ',' << format_double(t.dy) << ','
          << t.purpose << '\n';
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::string s = out.str();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw IoError("short write to " + path.string());
}

std::vector<RawRecord> read_diary_csv(const std::filesystem::path& path,
                                      const SurveySchema& schema) {
  schema.validate();
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for reading");

  std::string line;
  if (!std::getline(f, line)) {
    throw IoError("empty diary file " + path.string());
  }
  const std::vector<std::string> header = split_line(line);
  std::vector<std::string> expected;
  expected.push_back(schema.id_column);
  for (const VariableSpec& v : schema.vars) expected.push_back(v.name);
  if (header != expected) {
    throw SchemaError("diary header of " + path.string() +
                      " does not match the schema column order");
  }

  const auto pv = schema.person_vars();
  const std::size_t n_person = pv.size();
  const std::size_t n_cols = 1 + schema.vars.size();

  std::vector<RawRecord> records;
  std::unordered_map<std::string, std::size_t> by_id;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != n_cols) {
      throw ValueError("line " + std::to_string(line_no) + " of " +
                       path.string() + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(n_cols));
    }
    const std::string where = path.string() + ":" + std::to_string(line_no);

    std::vector<PersonValue> person;
    for (std::size_t i = 0; i < n_person; ++i) {
      const VariableSpec& v = *pv[i];
      if (v.is_label_kind()) {
        person.emplace_back(fields[1 + i]);
      } else {
        person.emplace_back(parse_double(fields[1 + i], where));
      }
    }

    Trip t;
    t.ox = parse_double(fields[1 + n_person + 0], where);
    t.oy = parse_double(fields[1 + n_person + 1], where);
    t.dx = parse_double(fields[1 + n_person + 2], where);
    t.dy = parse_double(fields[1 + n_person + 3], where);
    t.purpose = fields[1 + n_person + 4];

    const std::string& id = fields[0];
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      by_id.emplace(id, records.size());
      RawRecord r;
      r.id = id;
      r.person = std::move(person);
      r.trips.push_back(std::move(t));
      records.push_back(std::move(r));
    } else {
      records[it->second].trips.push_back(std::move(t));
    }
  }
  return records;
}

}  // namespace tripsynth::data
