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

#ifndef TRIPSYNTH_EVAL_HPP_
#define TRIPSYNTH_EVAL_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "tripsynth/data.hpp"
#include "tripsynth/tensor.hpp"

// Distributional audit of synthetic populations against a reference:
// binned marginal/conditional/joint frequency tables with SRMSE, Pearson
// correlation and R-squared, PCA over the encoded tabular matrix, and
// tour-segment length distributions.
namespace tripsynth::eval {

// Binned frequency table. labels[i] is the "|"-joined category tuple of
// bin i. valid[i] marks bins that participate in SRMSE (conditional
// columns without support are flagged invalid). probs sum to 1 when
// defined; an empty input yields defined=false with all-zero probs.
struct Histogram {
  std::vector<std::string> variables;
  std::vector<std::string> labels;
  std::vector<double> counts;
  std::vector<double> probs;
  std::vector<bool> valid;
  double total = 0.0;
  bool defined = true;
};

// Reference histogram from analytic probabilities (counts = probabilities).
Histogram make_histogram(std::vector<std::string> variables,
                         std::vector<std::string> labels,
                         std::vector<double> probabilities);

// Denominator convention for the SRMSE normalization: the bin count (the
// default) or the agent count of the reference set.
enum class SrmseNormalizer { kBins, kAgents };

struct SrmseReport {
  double srmse = 0.0;
  double pearson = 0.0;
  double r_squared = 0.0;
  std::size_t bins = 0;  // bins included in the comparison
};

// SRMSE over probability vectors, Pearson/R-squared over count vectors
// (R-squared against the identity line). Bins flagged invalid on either
// side are excluded. Bin structure must match exactly.
SrmseReport srmse(const Histogram& estimated, const Histogram& reference,
                  SrmseNormalizer norm = SrmseNormalizer::kBins,
                  double agent_count = 0.0);

// Variables resolve by schema name; label variables bin by category,
// numeric/geospatial by their schema bin edges. Four derived names are
// recognized on schemas carrying the survey columns: AgeGroup (binned
// P_AGE), Gender (P_SEXE), Employed and Educated (P_STATUT collapsed to
// yes/no by employed/student status).
Histogram marginal(const std::vector<data::RawRecord>& records,
                   const data::SurveySchema& schema,
                   const std::string& variable);

// p(a|b): bins are (a,b) pairs labeled "a|b", probabilities normalized
// within each b; b-values without support are flagged invalid. Person
// variables only.
Histogram conditional(const std::vector<data::RawRecord>& records,
                      const data::SurveySchema& schema, const std::string& var_a,
                      const std::string& var_b);

// Full cross product over person variables, zero-count bins included.
// Throws CapacityError when the bin count exceeds bin_cap.
Histogram joint(const std::vector<data::RawRecord>& records,
                const data::SurveySchema& schema,
                const std::vector<std::string>& variables,
                std::size_t bin_cap = 1000000);

struct PcaResult {
  std::vector<std::string> columns;   // encoded columns kept, in order
  std::vector<std::string> dropped;   // zero-variance columns
  Tensor components;                  // [k, d], orthonormal rows
  std::vector<double> eigenvalues;    // descending
  std::vector<double> explained;      // eigenvalue / trace ratios
  Tensor loadings;                    // [k, d], component-variable correlations
  Tensor scores;                      // [n, k], standardized data projected
};

// PCA of the correlation matrix of the encoded tabular block. Columns are
// standardized with the sample (n-1) variance; exact zero-variance columns
// are dropped. Component signs are fixed so each row's largest-magnitude
// entry is positive.
PcaResult pca(const std::vector<data::EncodedAgent>& agents,
              const data::Codec& codec, std::size_t k);

struct TourLengthReport {
  std::vector<double> distances_km;  // every segment of every record
  Histogram histogram;               // 1-km bins over [0,30] plus overflow
};

TourLengthReport tour_lengths(const std::vector<data::RawRecord>& records);

// Fixed layout shared with the fixture truth export: "[0,1)" .. "[29,30)",
// then "[30,inf)".
std::vector<std::string> tour_bin_labels();

// Comparison CSV: bin,reference_count,synthetic_count,reference_prob,
// synthetic_prob. Histograms must share bin structure.
void write_comparison_csv(const std::filesystem::path& path,
                          const Histogram& reference,
                          const Histogram& estimated);

nlohmann::ordered_json comparison_json(const Histogram& reference,
                                       const Histogram& estimated,
                                       const SrmseReport& report);

// components.csv / loadings.csv (component x variable matrices with a
// variable header) and scores.csv (agent x component).
void write_pca_csv(const std::filesystem::path& dir, const PcaResult& r);

}  // namespace tripsynth::eval

#endif  // TRIPSYNTH_EVAL_HPP_
