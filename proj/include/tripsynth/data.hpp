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

#ifndef TRIPSYNTH_DATA_HPP_
#define TRIPSYNTH_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tripsynth/nets.hpp"
#include "tripsynth/rng.hpp"
#include "tripsynth/tensor.hpp"

namespace tripsynth::data {

enum class VarKind { kNumeric, kBinary, kCategorical, kGeospatial };
enum class VarRole { kPerson, kTrip };

struct VariableSpec {
  std::string name;
  VarKind kind = VarKind::kCategorical;
  VarRole role = VarRole::kPerson;
  std::vector<std::string> labels;  // binary/categorical
  double min = 0.0, max = 0.0;      // numeric/geospatial range (schema-declared)
  std::vector<double> bin_edges;    // numeric/geospatial marginal bins

  bool is_label_kind() const {
    return kind == VarKind::kBinary || kind == VarKind::kCategorical;
  }
};

// Travel-diary schema: ordered person variables followed by the five trip
// variables (origin x/y, destination x/y, purpose). Encoding ranges come
// from here, never from the data.
struct SurveySchema {
  std::vector<VariableSpec> vars;
  std::string id_column = "person_id";
  std::string home_x, home_y;    // names of the person home coordinate pair
  std::string purpose_var;       // name of the trip purpose variable

  const VariableSpec* find(const std::string& name) const;
  std::vector<const VariableSpec*> person_vars() const;
  std::vector<const VariableSpec*> trip_vars() const;
  std::size_t person_index(const std::string& name) const;  // throws SchemaError
  void validate() const;
};

nlohmann::ordered_json schema_to_json(const SurveySchema& s);
SurveySchema schema_from_json(const nlohmann::json& j);

using PersonValue = std::variant<double, std::string>;

struct Trip {
  double ox = 0, oy = 0, dx = 0, dy = 0;
  std::string purpose;
};

struct RawRecord {
  std::string id;
  std::vector<PersonValue> person;  // aligned with schema person variables
  std::vector<Trip> trips;          // ordered tour segments
};

struct EncodedAgent {
  Tensor tab;           // [tab_width]
  Tensor seq;           // [T, 5], entries in [-1, 1], rows >= seq_len zero
  std::size_t seq_len;  // occupied rows: tour segments + terminal END row
};

// Reserved sequence terminator; appended after the schema purposes as the
// last grid index (scaled value +1).
inline constexpr const char* kEndLabel = "__END__";

// Pads encoded trip rows (each 5 wide) to T rows. Throws ValueError on an
// empty list and CapacityError when rows exceed T.
std::pair<Tensor, std::size_t> pad_sequence(const std::vector<std::vector<double>>& rows,
                                            std::size_t T);

// Reversible schema-driven codec: one-hot blocks for label variables,
// [-1,1] affine for numeric/geospatial, trips as [orig_x, orig_y, dest_x,
// dest_y, purpose] rows with the purpose on a scaled category grid.
class Codec {
 public:
  // Layout derives from the schema alone; records are validated (nonempty,
  // every label known, every value in range).
  static Codec fit(const std::vector<RawRecord>& records,
                   const SurveySchema& schema, std::size_t max_seq = 20);

  const SurveySchema& schema() const { return schema_; }
  std::size_t max_seq() const { return max_seq_; }
  std::size_t tab_width() const { return tab_width_; }
  const std::vector<std::string>& purpose_grid() const { return purpose_grid_; }

  EncodedAgent encode(const RawRecord& r) const;
  RawRecord decode(const EncodedAgent& a) const;

  // First row whose purpose channel decodes to END (clamped to
  // [3, min(15, T)]); T when no END row exists.
  std::size_t infer_seq_len(const Tensor& seq) const;

  std::vector<nets::HeadSpec> head_specs() const;

  nlohmann::ordered_json to_json() const;
  static Codec from_json(const nlohmann::json& j);

 private:
  SurveySchema schema_;
  std::size_t max_seq_ = 20;
  std::size_t tab_width_ = 0;
  std::vector<std::size_t> offsets_;        // per person variable
  std::vector<std::string> purpose_grid_;   // schema purposes + END
  // trip variable specs resolved once: ox, oy, dx, dy, purpose
  std::vector<VariableSpec> trip_specs_;

  double encode_range(const VariableSpec& v, double x) const;
  double decode_range(const VariableSpec& v, double e) const;
  double encode_purpose(const std::string& label) const;
  std::size_t nearest_purpose(double e) const;
};

// Keeps records whose tour starts and ends at the home coordinate (within
// 1 metre) and visits 3..15 locations (a tour with L segments visits L+1).
std::vector<RawRecord> filter_home_based(const std::vector<RawRecord>& records,
                                         const SurveySchema& schema);

// Deterministic shuffle-split; throws ValueError when either side would be
// empty.
std::pair<std::vector<RawRecord>, std::vector<RawRecord>> split(
    const std::vector<RawRecord>& records, double fraction, std::uint64_t seed);

// Encoded corpus with its codec; the binary container round-trips bit for
// bit ("DPDS", version 1, length-prefixed named sections, trailing crc32).
struct Dataset {
  Codec codec;
  std::vector<EncodedAgent> agents;
  std::string provenance;

  static Dataset encode_all(const std::vector<RawRecord>& records,
                            const Codec& codec, std::string provenance);
  std::vector<RawRecord> decode_all() const;

  void save(const std::filesystem::path& path) const;
  static Dataset load(const std::filesystem::path& path);
};

// Travel-diary CSV: header is id column + schema variables in order, one
// row per trip, person attributes repeated on each of their rows.
void write_diary_csv(const std::filesystem::path& path,
                     const SurveySchema& schema,
                     const std::vector<RawRecord>& records);
std::vector<RawRecord> read_diary_csv(const std::filesystem::path& path,
                                      const SurveySchema& schema);

// Shortest round-trip decimal rendering; used for every double the library
// prints (CSV, JSON, labels) so outputs are byte-stable.
std::string format_double(double x);

// Half-open bin label "[lo,hi)"; the final bin of a range is closed.
std::string bin_label(double lo, double hi, bool last);

}  // namespace tripsynth::data

#endif  // TRIPSYNTH_DATA_HPP_
