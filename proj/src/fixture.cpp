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

#include "tripsynth/fixture.hpp"

#include <array>
#include <cmath>
#include <string>

#include "tripsynth/error.hpp"
#include "tripsynth/rng.hpp"

namespace tripsynth::data {
namespace {

// Parent normal whose [5,95] truncation has mean 43 and sd 20 exactly
// (2-D moment solve; residual below 1e-13).
constexpr double kAgeMu = 40.237029982048135;
constexpr double kAgeSigma = 23.94881267172336;
constexpr double kAgeLo = 5.0, kAgeHi = 95.0;

constexpr double kCenterX = 300000.0, kCenterY = 5040000.0;
constexpr double kHomeHalf = 10000.0;        // home uniform in center +- 10 km
constexpr double kLegLo = 500.0, kLegHi = 12500.0;  // out-leg metres
constexpr double kTwoPi = 6.283185307179586476925286766559;

constexpr std::size_t kAgeGroups = 9;
const std::array<double, kAgeGroups + 1> kAgeEdges = {5,  15, 25, 35, 45,
                                                     55, 65, 75, 85, 95};

const std::array<const char*, 2> kSexLabels = {"male", "female"};
const std::array<const char*, 2> kMobilLabels = {"yes", "no"};
const std::array<const char*, 5> kStatusLabels = {"employed", "student",
                                                 "unemployed", "retired",
                                                 "homemaker"};
const std::array<const char*, 4> kPermitLabels = {"none", "car", "motorbike",
                                                 "both"};
const std::array<const char*, 4> kOutPurposes = {"work", "education",
                                                "shopping", "leisure"};

// Conditional tables; every row sums to 1.
const double kStatusGivenAge[kAgeGroups][5] = {
    {0.00, 1.00, 0.00, 0.00, 0.00}, {0.30, 0.55, 0.08, 0.00, 0.07},
    {0.72, 0.10, 0.08, 0.00, 0.10}, {0.78, 0.03, 0.07, 0.00, 0.12},
    {0.78, 0.01, 0.07, 0.02, 0.12}, {0.62, 0.00, 0.08, 0.18, 0.12},
    {0.12, 0.00, 0.02, 0.76, 0.10}, {0.02, 0.00, 0.00, 0.90, 0.08},
    {0.00, 0.00, 0.00, 0.95, 0.05}};

const double kPermitGivenAge[kAgeGroups][4] = {
    {1.00, 0.00, 0.00, 0.00}, {0.45, 0.40, 0.10, 0.05},
    {0.18, 0.60, 0.10, 0.12}, {0.12, 0.64, 0.08, 0.16},
    {0.10, 0.66, 0.06, 0.18}, {0.10, 0.68, 0.04, 0.18},
    {0.12, 0.70, 0.03, 0.15}, {0.18, 0.70, 0.02, 0.10},
    {0.30, 0.62, 0.02, 0.06}};

const double kMobilGivenStatus[5][2] = {
    {0.80, 0.20}, {0.25, 0.75}, {0.45, 0.55}, {0.55, 0.45}, {0.65, 0.35}};

const double kPurposeGivenStatus[5][4] = {{0.60, 0.02, 0.18, 0.20},
                                          {0.05, 0.65, 0.10, 0.20},
                                          {0.05, 0.05, 0.45, 0.45},
                                          {0.00, 0.02, 0.43, 0.55},
                                          {0.02, 0.03, 0.55, 0.40}};

// Round trips per person: 1, 2 or 3 (3, 5 or 7 locations).
const double kTripCountProb[3] = {0.5, 0.3, 0.2};

// Toy chain: T_COLOR -> T_SIZE -> T_SHAPE.
const std::array<const char*, 3> kColorLabels = {"red", "green", "blue"};
const std::array<const char*, 2> kSizeLabels = {"small", "large"};
const std::array<const char*, 2> kShapeLabels = {"circle", "square"};
const double kColorProb[3] = {0.5, 0.3, 0.2};
const double kSizeGivenColor[3][2] = {{0.80, 0.20}, {0.40, 0.60}, {0.15, 0.85}};
const double kShapeGivenSize[2][2] = {{0.70, 0.30}, {0.25, 0.75}};
constexpr double kToyHomeHalf = 100.0;
constexpr double kToyLegLo = 1000.0, kToyLegHi = 5000.0;

// RNG substream tags (one independent stream per person per fixture).
constexpr std::uint64_t kTagStandard = 0x5354414E44415244ULL;  // "STANDARD"
constexpr std::uint64_t kTagToy = 0x544F594649585455ULL;       // "TOYFIXTU"

std::size_t pick(SeededRng& r, const double* p, std::size_t n) {
  const double u = r.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return n - 1;
}

std::size_t age_group(double age) {
  const auto g = static_cast<std::size_t>((age - kAgeLo) / 10.0);
  return g >= kAgeGroups ? kAgeGroups - 1 : g;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Truncated-normal mass of [lo, hi] within the support.
double age_mass(double lo, double hi) {
  const double z = normal_cdf((kAgeHi - kAgeMu) / kAgeSigma) -
                   normal_cdf((kAgeLo - kAgeMu) / kAgeSigma);
  return (normal_cdf((hi - kAgeMu) / kAgeSigma) -
          normal_cdf((lo - kAgeMu) / kAgeSigma)) /
         z;
}

VariableSpec person_label(const char* name,
                          const std::vector<std::string>& labels,
                          VarKind kind = VarKind::kCategorical) {
  VariableSpec v;
  v.name = name;
  v.kind = kind;
  v.role = VarRole::kPerson;
  v.labels = labels;
  return v;
}

VariableSpec geo(const char* name, VarRole role, double min, double max,
                 std::vector<double> edges = {}) {
  VariableSpec v;
  v.name = name;
  v.kind = VarKind::kGeospatial;
  v.role = role;
  v.min = min;
  v.max = max;
  v.bin_edges = std::move(edges);
  return v;
}

// Segment-length histogram for an out-leg law U[lo, hi] metres: 1-km bins
// over [0, 30] km plus an overflow bin. Every tour segment of either
// fixture has this length law.
nlohmann::ordered_json leg_histogram(double lo_m, double hi_m) {
  const double lo = lo_m / 1000.0, hi = hi_m / 1000.0;
  nlohmann::ordered_json h;
  std::vector<double> edges, probs;
  for (int b = 0; b <= 30; ++b) edges.push_back(b);
  for (int b = 0; b < 30; ++b) {
    const double a = std::max(lo, static_cast<double>(b));
    const double c = std::min(hi, static_cast<double>(b + 1));
    probs.push_back(c > a ? (c - a) / (hi - lo) : 0.0);
  }
  probs.push_back(0.0);  // overflow
  h["edges_km"] = edges;
  h["probabilities"] = probs;
  return h;
}

}  // namespace

SurveySchema standard_schema() {
  SurveySchema s;
  VariableSpec age;
  age.name = "P_AGE";
  age.kind = VarKind::kNumeric;
  age.role = VarRole::kPerson;
  age.min = kAgeLo;
  age.max = kAgeHi;
  age.bin_edges.assign(kAgeEdges.begin(), kAgeEdges.end());
  s.vars.push_back(age);
  s.vars.push_back(person_label("P_SEXE", {kSexLabels[0], kSexLabels[1]},
                                VarKind::kBinary));
  s.vars.push_back(person_label("P_MOBIL", {kMobilLabels[0], kMobilLabels[1]}));
  s.vars.push_back(person_label(
      "P_STATUT", {kStatusLabels.begin(), kStatusLabels.end()}));
  s.vars.push_back(
      person_label("PERMIT", {kPermitLabels.begin(), kPermitLabels.end()}));
  s.vars.push_back(geo("M_DOMXCOOR", VarRole::kPerson, kCenterX - kHomeHalf,
                       kCenterX + kHomeHalf,
                       {290000, 295000, 300000, 305000, 310000}));
  s.vars.push_back(geo("M_DOMYCOOR", VarRole::kPerson, kCenterY - kHomeHalf,
                       kCenterY + kHomeHalf,
                       {5030000, 5035000, 5040000, 5045000, 5050000}));
  const double m = kHomeHalf + kLegHi;
  s.vars.push_back(geo("D_ORIXCOOR", VarRole::kTrip, kCenterX - m, kCenterX + m));
  s.vars.push_back(geo("D_ORIYCOOR", VarRole::kTrip, kCenterY - m, kCenterY + m));
  s.vars.push_back(geo("D_DESXCOOR", VarRole::kTrip, kCenterX - m, kCenterX + m));
  s.vars.push_back(geo("D_DESYCOOR", VarRole::kTrip, kCenterY - m, kCenterY + m));
  std::vector<std::string> purposes(kOutPurposes.begin(), kOutPurposes.end());
  purposes.push_back("home");
  VariableSpec motif = person_label("D_MOTIF", purposes);
  motif.role = VarRole::kTrip;
  s.vars.push_back(motif);
  s.home_x = "M_DOMXCOOR";
  s.home_y = "M_DOMYCOOR";
  s.purpose_var = "D_MOTIF";
  return s;
}

std::vector<RawRecord> synth_fixture(std::uint64_t seed, std::size_t n) {
  if (n == 0) throw ValueError("fixture size must be at least 1");
  const SeededRng root(seed);
  std::vector<RawRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SeededRng r = root.derive(kTagStandard, i);
    RawRecord rec;
    rec.id = "p" + std::to_string(i + 1);

    double age = r.gaussian(kAgeMu, kAgeSigma);
    while (age < kAgeLo || age > kAgeHi) age = r.gaussian(kAgeMu, kAgeSigma);
    const std::size_t g = age_group(age);
    const std::size_t sex = r.uniform() < 0.5 ? 0 : 1;
    const std::size_t status = pick(r, kStatusGivenAge[g], 5);
    const std::size_t permit = pick(r, kPermitGivenAge[g], 4);
    const std::size_t mobil = pick(r, kMobilGivenStatus[status], 2);
    const double hx = r.uniform(kCenterX - kHomeHalf, kCenterX + kHomeHalf);
    const double hy = r.uniform(kCenterY - kHomeHalf, kCenterY + kHomeHalf);

    rec.person = {age,
                  std::string(kSexLabels[sex]),
                  std::string(kMobilLabels[mobil]),
                  std::string(kStatusLabels[status]),
                  std::string(kPermitLabels[permit]),
                  hx,
                  hy};

    const std::size_t trips = 1 + pick(r, kTripCountProb, 3);
    for (std::size_t t = 0; t < trips; ++t) {
      const std::size_t purpose = pick(r, kPurposeGivenStatus[status], 4);
      const double d = r.uniform(kLegLo, kLegHi);
      const double theta = r.uniform(0.0, kTwoPi);
      const double lx = hx + d * std::cos(theta);
      const double ly = hy + d * std::sin(theta);
      rec.trips.push_back({hx, hy, lx, ly, kOutPurposes[purpose]});
      rec.trips.push_back({lx, ly, hx, hy, "home"});
    }
    out.push_back(std::move(rec));
  }
  return out;
}

nlohmann::ordered_json fixture_truth() {
  nlohmann::ordered_json t;
  t["variables"] = {"P_AGE", "P_SEXE", "P_MOBIL", "P_STATUT", "PERMIT"};

  std::vector<std::string> age_labels;
  std::vector<double> age_prob;
  for (std::size_t g = 0; g < kAgeGroups; ++g) {
    age_labels.push_back(
        bin_label(kAgeEdges[g], kAgeEdges[g + 1], g + 1 == kAgeGroups));
    age_prob.push_back(age_mass(kAgeEdges[g], kAgeEdges[g + 1]));
  }

  // Status, permit and mobility marginals from the conditional tables.
  std::array<double, 5> p_status{};
  std::array<double, 4> p_permit{};
  for (std::size_t g = 0; g < kAgeGroups; ++g) {
    for (std::size_t s = 0; s < 5; ++s) {
      p_status[s] += age_prob[g] * kStatusGivenAge[g][s];
    }
    for (std::size_t p = 0; p < 4; ++p) {
      p_permit[p] += age_prob[g] * kPermitGivenAge[g][p];
    }
  }
  std::array<double, 2> p_mobil{};
  for (std::size_t s = 0; s < 5; ++s) {
    for (std::size_t m = 0; m < 2; ++m) {
      p_mobil[m] += p_status[s] * kMobilGivenStatus[s][m];
    }
  }

  nlohmann::ordered_json labels;
  labels["P_AGE"] = age_labels;
  labels["P_SEXE"] = std::vector<std::string>(kSexLabels.begin(),
                                              kSexLabels.end());
  labels["P_MOBIL"] = std::vector<std::string>(kMobilLabels.begin(),
                                               kMobilLabels.end());
  labels["P_STATUT"] = std::vector<std::string>(kStatusLabels.begin(),
                                                kStatusLabels.end());
  labels["PERMIT"] = std::vector<std::string>(kPermitLabels.begin(),
                                              kPermitLabels.end());
  t["labels"] = labels;

  // Joint = p(age group) p(sex) p(mobil|status) p(status|age) p(permit|age),
  // keyed "age|sex|mobil|status|permit".
  nlohmann::ordered_json joint;
  for (std::size_t g = 0; g < kAgeGroups; ++g) {
    for (std::size_t x = 0; x < 2; ++x) {
      for (std::size_t m = 0; m < 2; ++m) {
        for (std::size_t s = 0; s < 5; ++s) {
          for (std::size_t p = 0; p < 4; ++p) {
            const double prob = age_prob[g] * 0.5 * kMobilGivenStatus[s][m] *
                                kStatusGivenAge[g][s] * kPermitGivenAge[g][p];
            joint[age_labels[g] + "|" + kSexLabels[x] + "|" + kMobilLabels[m] +
                  "|" + kStatusLabels[s] + "|" + kPermitLabels[p]] = prob;
          }
        }
      }
    }
  }
  t["joint"] = joint;

  nlohmann::ordered_json marg;
  {
    nlohmann::ordered_json m;
    for (std::size_t g = 0; g < kAgeGroups; ++g) m[age_labels[g]] = age_prob[g];
    marg["P_AGE"] = m;
  }
  {
    nlohmann::ordered_json m;
    m[kSexLabels[0]] = 0.5;
    m[kSexLabels[1]] = 0.5;
    marg["P_SEXE"] = m;
  }
  {
    nlohmann::ordered_json m;
    for (std::size_t i = 0; i < 2; ++i) m[kMobilLabels[i]] = p_mobil[i];
    marg["P_MOBIL"] = m;
  }
  {
    nlohmann::ordered_json m;
    for (std::size_t i = 0; i < 5; ++i) m[kStatusLabels[i]] = p_status[i];
    marg["P_STATUT"] = m;
  }
  {
    nlohmann::ordered_json m;
    for (std::size_t i = 0; i < 4; ++i) m[kPermitLabels[i]] = p_permit[i];
    marg["PERMIT"] = m;
  }
  t["marginals"] = marg;

  t["tour_km"] = leg_histogram(kLegLo, kLegHi);
  {
    nlohmann::ordered_json loc;
    loc["3"] = kTripCountProb[0];
    loc["5"] = kTripCountProb[1];
    loc["7"] = kTripCountProb[2];
    t["locations"] = loc;
  }
  {
    nlohmann::ordered_json age;
    age["mean"] = 43.0;
    age["sd"] = 20.0;
    age["min"] = kAgeLo;
    age["max"] = kAgeHi;
    t["age"] = age;
  }
  return t;
}

SurveySchema toy_schema() {
  SurveySchema s;
  s.vars.push_back(
      person_label("T_COLOR", {kColorLabels.begin(), kColorLabels.end()}));
  s.vars.push_back(person_label("T_SIZE", {kSizeLabels[0], kSizeLabels[1]},
                                VarKind::kBinary));
  s.vars.push_back(person_label("T_SHAPE", {kShapeLabels[0], kShapeLabels[1]},
                                VarKind::kBinary));
  s.vars.push_back(geo("HOME_X", VarRole::kPerson, -kToyHomeHalf, kToyHomeHalf,
                       {-100, -50, 0, 50, 100}));
  s.vars.push_back(geo("HOME_Y", VarRole::kPerson, -kToyHomeHalf, kToyHomeHalf,
                       {-100, -50, 0, 50, 100}));
  const double m = kToyHomeHalf + kToyLegHi;
  s.vars.push_back(geo("T_OX", VarRole::kTrip, -m, m));
  s.vars.push_back(geo("T_OY", VarRole::kTrip, -m, m));
  s.vars.push_back(geo("T_DX", VarRole::kTrip, -m, m));
  s.vars.push_back(geo("T_DY", VarRole::kTrip, -m, m));
  VariableSpec purpose = person_label("T_PURPOSE", {"out", "home"});
  purpose.role = VarRole::kTrip;
  s.vars.push_back(purpose);
  s.home_x = "HOME_X";
  s.home_y = "HOME_Y";
  s.purpose_var = "T_PURPOSE";
  return s;
}

std::vector<RawRecord> toy_fixture(std::uint64_t seed, std::size_t n) {
  if (n == 0) throw ValueError("fixture size must be at least 1");
  const SeededRng root(seed);
  std::vector<RawRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SeededRng r = root.derive(kTagToy, i);
    RawRecord rec;
    rec.id = "p" + std::to_string(i + 1);
    const std::size_t color = pick(r, kColorProb, 3);
    const std::size_t size = pick(r, kSizeGivenColor[color], 2);
    const std::size_t shape = pick(r, kShapeGivenSize[size], 2);
    const double hx = r.uniform(-kToyHomeHalf, kToyHomeHalf);
    const double hy = r.uniform(-kToyHomeHalf, kToyHomeHalf);
    rec.person = {std::string(kColorLabels[color]),
                  std::string(kSizeLabels[size]),
                  std::string(kShapeLabels[shape]), hx, hy};
    const double d = r.uniform(kToyLegLo, kToyLegHi);
    const double theta = r.uniform(0.0, kTwoPi);
    const double lx = hx + d * std::cos(theta);
    const double ly = hy + d * std::sin(theta);
    rec.trips.push_back({hx, hy, lx, ly, "out"});
    rec.trips.push_back({lx, ly, hx, hy, "home"});
    out.push_back(std::move(rec));
  }
  return out;
}

nlohmann::ordered_json toy_truth() {
  nlohmann::ordered_json t;
  t["variables"] = {"T_COLOR", "T_SIZE", "T_SHAPE"};

  std::array<double, 2> p_size{};
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t s = 0; s < 2; ++s) {
      p_size[s] += kColorProb[c] * kSizeGivenColor[c][s];
    }
  }
  std::array<double, 2> p_shape{};
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t h = 0; h < 2; ++h) {
      p_shape[h] += p_size[s] * kShapeGivenSize[s][h];
    }
  }

  nlohmann::ordered_json labels;
  labels["T_COLOR"] = std::vector<std::string>(kColorLabels.begin(),
                                               kColorLabels.end());
  labels["T_SIZE"] = std::vector<std::string>(kSizeLabels.begin(),
                                              kSizeLabels.end());
  labels["T_SHAPE"] = std::vector<std::string>(kShapeLabels.begin(),
                                               kShapeLabels.end());
  t["labels"] = labels;

  nlohmann::ordered_json joint;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t h = 0; h < 2; ++h) {
        joint[std::string(kColorLabels[c]) + "|" + kSizeLabels[s] + "|" +
              kShapeLabels[h]] =
            kColorProb[c] * kSizeGivenColor[c][s] * kShapeGivenSize[s][h];
      }
    }
  }
  t["joint"] = joint;

  nlohmann::ordered_json marg;
  {
    nlohmann::ordered_json m;
    for (std::size_t c = 0; c < 3; ++c) m[kColorLabels[c]] = kColorProb[c];
    marg["T_COLOR"] = m;
  }
  {
    nlohmann::ordered_json m;
    for (std::size_t s = 0; s < 2; ++s) m[kSizeLabels[s]] = p_size[s];
    marg["T_SIZE"] = m;
  }
  {
    nlohmann::ordered_json m;
    for (std::size_t h = 0; h < 2; ++h) m[kShapeLabels[h]] = p_shape[h];
    marg["T_SHAPE"] = m;
  }
  t["marginals"] = marg;

  t["tour_km"] = leg_histogram(kToyLegLo, kToyLegHi);
  {
    nlohmann::ordered_json loc;
    loc["3"] = 1.0;
    t["locations"] = loc;
  }
  return t;
}

}  // namespace tripsynth::data
