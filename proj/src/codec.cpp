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

#include <algorithm>
#include <cmath>
#include <string>

#include "tripsynth/data.hpp"
#include "tripsynth/error.hpp"

namespace tripsynth::data {
namespace {

constexpr std::size_t kSeqWidth = 5;
constexpr std::size_t kMinLocations = 3;
constexpr std::size_t kMaxLocations = 15;

std::size_t label_index(const VariableSpec& v, const std::string& label) {
  for (std::size_t i = 0; i < v.labels.size(); ++i) {
    if (v.labels[i] == label) return i;
  }
  throw SchemaError("variable " + v.name + " has no category " + label);
}

}  // namespace

std::pair<Tensor, std::size_t> pad_sequence(
    const std::vector<std::vector<double>>& rows, std::size_t T) {
  if (rows.empty()) {
    throw ValueError("pad_sequence requires at least one row");
  }
  if (rows.size() > T) {
    throw CapacityError("sequence of " + std::to_string(rows.size()) +
                        " rows exceeds padded length " + std::to_string(T));
  }
  Tensor out({T, kSeqWidth});
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != kSeqWidth) {
      throw ShapeError("sequence rows must have 5 features, got " +
                       std::to_string(rows[t].size()));
    }
    for (std::size_t j = 0; j < kSeqWidth; ++j) out(t, j) = rows[t][j];
  }
  return {std::move(out), rows.size()};
}

double Codec::encode_range(const VariableSpec& v, double x) const {
  if (x < v.min || x > v.max) {
    throw SchemaError("variable " + v.name + " value " + format_double(x) +
                      " outside declared range [" + format_double(v.min) +
                      "," + format_double(v.max) + "]");
  }
  return 2.0 * (x - v.min) / (v.max - v.min) - 1.0;
}

double Codec::decode_range(const VariableSpec& v, double e) const {
  const double c = std::clamp(e, -1.0, 1.0);
  return (c + 1.0) * 0.5 * (v.max - v.min) + v.min;
}

double Codec::encode_purpose(const std::string& label) const {
  const std::size_t g = purpose_grid_.size();
  for (std::size_t i = 0; i < g; ++i) {
    if (purpose_grid_[i] == label) {
      return 2.0 * static_cast<double>(i) / static_cast<double>(g - 1) - 1.0;
    }
  }
  throw SchemaError("variable " + trip_specs_[4].name + " has no category " +
                    label);
}

std::size_t Codec::nearest_purpose(double e) const {
  const std::size_t g = purpose_grid_.size();
  const double c = std::clamp(e, -1.0, 1.0);
  const double pos = (c + 1.0) * 0.5 * static_cast<double>(g - 1);
  const double r = std::floor(pos + 0.5);
  const std::size_t idx = static_cast<std::size_t>(r);
  return idx >= g ? g - 1 : idx;
}

Codec Codec::fit(const std::vector<RawRecord>& records,
                 const SurveySchema& schema, std::size_t max_seq) {
  schema.validate();
  if (records.empty()) {
    throw ValueError("fit requires at least one record");
  }
  if (max_seq < kMinLocations) {
    throw ValueError("max_seq must be at least 3");
  }

  Codec c;
  c.schema_ = schema;
  c.max_seq_ = max_seq;
  std::size_t off = 0;
  for (const VariableSpec* v : schema.person_vars()) {
    c.offsets_.push_back(off);
    off += v->is_label_kind() ? v->labels.size() : 1;
  }
  c.tab_width_ = off;
  for (const VariableSpec* v : schema.trip_vars()) {
    c.trip_specs_.push_back(*v);
  }
  c.purpose_grid_ = c.trip_specs_[4].labels;
  c.purpose_grid_.push_back(kEndLabel);

  // Validation pass: every record must encode cleanly.
  for (const RawRecord& r : records) c.encode(r);
  return c;
}

EncodedAgent Codec::encode(const RawRecord& r) const {
  const auto pv = schema_.person_vars();
  if (r.person.size() != pv.size()) {
    throw SchemaError("record " + r.id + " carries " +
                      std::to_string(r.person.size()) +
                      " person values, schema declares " +
                      std::to_string(pv.size()));
  }

  EncodedAgent a;
  a.tab = Tensor({tab_width_});
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const VariableSpec& v = *pv[i];
    const std::size_t off = offsets_[i];
    if (v.is_label_kind()) {
      const std::string* label = std::get_if<std::string>(&r.person[i]);
      if (label == nullptr) {
        throw SchemaError("variable " + v.name + " expects a category label");
      }
      a.tab(off + label_index(v, *label)) = 1.0;
    } else {
      const double* x = std::get_if<double>(&r.person[i]);
      if (x == nullptr) {
        throw SchemaError("variable " + v.name + " expects a number");
      }
      a.tab(off) = encode_range(v, *x);
    }
  }

  const std::size_t locations = r.trips.size() + 1;
  if (locations < kMinLocations || locations > kMaxLocations) {
    throw SchemaError("record " + r.id + " visits " +
                      std::to_string(locations) +
                      " locations, outside the 3..15 tour bound");
  }

  std::vector<std::vector<double>> rows;
  for (const Trip& t : r.trips) {
    rows.push_back({encode_range(trip_specs_[0], t.ox),
                    encode_range(trip_specs_[1], t.oy),
                    encode_range(trip_specs_[2], t.dx),
                    encode_range(trip_specs_[3], t.dy),
                    encode_purpose(t.purpose)});
  }
  // Terminal row: END purpose, coordinates at the scaled midpoint.
  rows.push_back({0.0, 0.0, 0.0, 0.0, encode_purpose(kEndLabel)});
  auto [seq, len] = pad_sequence(rows, max_seq_);
  a.seq = std::move(seq);
  a.seq_len = len;
  return a;
}

RawRecord Codec::decode(const EncodedAgent& a) const {
  if (a.tab.size() != tab_width_) {
    throw ShapeError("encoded tabular width " + a.tab.shape_str() +
                     " does not match codec width [" +
                     std::to_string(tab_width_) + "]");
  }
  if (a.seq.rank() != 2 || a.seq.shape[0] != max_seq_ ||
      a.seq.shape[1] != kSeqWidth) {
    throw ShapeError("encoded sequence shape " + a.seq.shape_str() +
                     " does not match [" + std::to_string(max_seq_) + " x 5]");
  }
  if (a.seq_len < kMinLocations || a.seq_len > std::min(kMaxLocations, max_seq_)) {
    throw SchemaError("seq_len " + std::to_string(a.seq_len) +
                      " outside the 3..15 tour bound");
  }

  RawRecord r;
  const auto pv = schema_.person_vars();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const VariableSpec& v = *pv[i];
    const std::size_t off = offsets_[i];
    if (v.is_label_kind()) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < v.labels.size(); ++j) {
        if (a.tab(off + j) > a.tab(off + best)) best = j;
      }
      r.person.emplace_back(v.labels[best]);
    } else {
      r.person.emplace_back(decode_range(v, a.tab(off)));
    }
  }

  for (std::size_t t = 0; t + 1 < a.seq_len; ++t) {
    Trip trip;
    trip.ox = decode_range(trip_specs_[0], a.seq(t, 0));
    trip.oy = decode_range(trip_specs_[1], a.seq(t, 1));
    trip.dx = decode_range(trip_specs_[2], a.seq(t, 2));
    trip.dy = decode_range(trip_specs_[3], a.seq(t, 3));
    const std::size_t p = nearest_purpose(a.seq(t, 4));
    // A segment row decoding to END would truncate the tour; map it to the
    // nearest real purpose instead so decode always yields seq_len-1 trips.
    trip.purpose = purpose_grid_[p + 1 == purpose_grid_.size() ? p - 1 : p];
    r.trips.push_back(std::move(trip));
  }
  return r;
}

std::size_t Codec::infer_seq_len(const Tensor& seq) const {
  if (seq.rank() != 2 || seq.shape[0] != max_seq_ ||
      seq.shape[1] != kSeqWidth) {
    throw ShapeError("sequence shape " + seq.shape_str() +
                     " does not match [" + std::to_string(max_seq_) + " x 5]");
  }
  std::size_t len = max_seq_;
  for (std::size_t t = 0; t < max_seq_; ++t) {
    if (nearest_purpose(seq(t, 4)) + 1 == purpose_grid_.size()) {
      len = t + 1;
      break;
    }
  }
  return std::clamp(len, kMinLocations, std::min(kMaxLocations, max_seq_));
}

std::vector<nets::HeadSpec> Codec::head_specs() const {
  std::vector<nets::HeadSpec> out;
  for (const VariableSpec* v : schema_.person_vars()) {
    nets::HeadSpec h;
    h.name = v->name;
    h.categorical = v->is_label_kind();
    h.width = h.categorical ? v->labels.size() : 1;
    out.push_back(std::move(h));
  }
  return out;
}

nlohmann::ordered_json Codec::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = schema_to_json(schema_);
  j["max_seq"] = max_seq_;
  return j;
}

std::vector<RawRecord> filter_home_based(const std::vector<RawRecord>& records,
                                         const SurveySchema& schema) {
  schema.validate();
  const std::size_t hx = schema.person_index(schema.home_x);
  const std::size_t hy = schema.person_index(schema.home_y);
  constexpr double kTol = 1.0;  // metres

  std::vector<RawRecord> out;
  for (const RawRecord& r : records) {
    const std::size_t locations = r.trips.size() + 1;
    if (locations < kMinLocations || locations > kMaxLocations) continue;
    const double* x = std::get_if<double>(&r.person[hx]);
    const double* y = std::get_if<double>(&r.person[hy]);
    if (x == nullptr || y == nullptr) {
      throw SchemaError("record " + r.id + " lacks numeric home coordinates");
    }
    const Trip& first = r.trips.front();
    const Trip& last = r.trips.back();
    const bool starts_home =
        std::abs(first.ox - *x) <= kTol && std::abs(first.oy - *y) <= kTol;
    const bool ends_home =
        std::abs(last.dx - *x) <= kTol && std::abs(last.dy - *y) <= kTol;
    bool chained = true;
    for (std::size_t i = 0; i + 1 < r.trips.size(); ++i) {
      if (r.trips[i].dx != r.trips[i + 1].ox ||
          r.trips[i].dy != r.trips[i + 1].oy) {
        chained = false;
        break;
      }
    }
    if (starts_home && ends_home && chained) out.push_back(r);
  }
  return out;
}

std::pair<std::vector<RawRecord>, std::vector<RawRecord>> split(
    const std::vector<RawRecord>& records, double fraction,
    std::uint64_t seed) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw ValueError("split fraction must lie strictly inside (0,1)");
  }
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SeededRng rng(seed);
  // Fisher-Yates driven by the counter stream; deterministic in seed.
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::uint64_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }
  const std::size_t n_first = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(records.size())));
  if (n_first == 0 || n_first == records.size()) {
    throw ValueError("split would leave one side empty");
  }
  std::pair<std::vector<RawRecord>, std::vector<RawRecord>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_first ? out.first : out.second).push_back(records[order[i]]);
  }
  return out;
}

Codec Codec::from_json(const nlohmann::json& j) {
  try {
    SurveySchema schema = schema_from_json(j.at("schema"));
    const std::size_t max_seq = j.at("max_seq").get<std::size_t>();
    Codec c;
    c.schema_ = schema;
    c.max_seq_ = max_seq;
    if (max_seq < kMinLocations) {
      throw SchemaError("codec max_seq must be at least 3");
    }
    std::size_t off = 0;
    for (const VariableSpec* v : schema.person_vars()) {
      c.offsets_.push_back(off);
      off += v->is_label_kind() ? v->labels.size() : 1;
    }
    c.tab_width_ = off;
    for (const VariableSpec* v : schema.trip_vars()) {
      c.trip_specs_.push_back(*v);
    }
    c.purpose_grid_ = c.trip_specs_[4].labels;
    c.purpose_grid_.push_back(kEndLabel);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed codec json: ") + e.what());
  }
}

}  // namespace tripsynth::data
