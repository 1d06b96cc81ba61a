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

#ifndef TRIPSYNTH_FIXTURE_HPP_
#define TRIPSYNTH_FIXTURE_HPP_

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "tripsynth/data.hpp"

// Deterministic synthetic survey standing in for a real travel diary. The
// sampling process is built from closed-form pieces, so the exact joint
// distribution of the person attributes, the tour-length law, and the
// location-count law are exported alongside the records for oracle tests.
namespace tripsynth::data {

// Survey layout: person variables P_AGE, P_SEXE, P_MOBIL, P_STATUT, PERMIT
// and home coordinates M_DOMXCOOR/M_DOMYCOOR, trip variables D_ORIXCOOR,
// D_ORIYCOOR, D_DESXCOOR, D_DESYCOOR, D_MOTIF.
SurveySchema standard_schema();

// Age is truncated-normal on [5,95] with post-truncation mean 43 and sd 20;
// status and permit depend on age group, mobility on status, trip purpose
// on status. Tours are 1..3 home-based round trips (3/5/7 locations) around
// a planar urban center, every out leg U[0.5km, 12.5km] from home.
std::vector<RawRecord> synth_fixture(std::uint64_t seed, std::size_t n);

// Analytic law of synth_fixture: the exact joint over (AgeGroup, P_SEXE,
// P_MOBIL, P_STATUT, PERMIT) keyed by "|"-joined labels, per-variable
// marginals, the 1-km tour-segment histogram, the location-count law, and
// the age moments.
nlohmann::ordered_json fixture_truth();

// Tiny correlated fixture for fast end-to-end runs: three label variables
// (T_COLOR -> T_SIZE -> T_SHAPE chain) and a single round trip per person
// (3 locations, out leg U[1km, 5km]).
SurveySchema toy_schema();
std::vector<RawRecord> toy_fixture(std::uint64_t seed, std::size_t n);
nlohmann::ordered_json toy_truth();

// Padded sequence length the toy codec should be fitted with.
inline constexpr std::size_t kToyMaxSeq = 4;

}  // namespace tripsynth::data

#endif  // TRIPSYNTH_FIXTURE_HPP_
