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

// White-box membership inference against a trained discriminator: score
// the training and held-out sets, summarize their separation as a rank
// AUC, and lay both score histograms over one shared 50-bin grid.

#ifndef TRIPSYNTH_ATTACK_HPP_
#define TRIPSYNTH_ATTACK_HPP_

#include <cstddef>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "tripsynth/data.hpp"
#include "tripsynth/trainer.hpp"

namespace tripsynth::attack {

inline constexpr std::size_t kHistogramBins = 50;

struct AttackReport {
  // Per-example discriminator scores, in input order. Critic values from a
  // wasserstein model are min-max rescaled to [0, 1] over the pooled sets
  // before histogramming; sigmoid scores are kept as-is. Rescaling is
  // monotone, so it cannot change the AUC.
  std::vector<double> train_scores;
  std::vector<double> validation_scores;

  // Probability a random training score outranks a random validation
  // score, ties counted half.
  double auc = 0.5;

  // Shared histogram layout: kHistogramBins equal bins spanning the pooled
  // observed score range (degenerate range widened to a unit interval).
  std::vector<double> bin_edges;
  std::vector<double> train_hist;       // counts
  std::vector<double> validation_hist;  // counts

  // Modality summary: number of local maxima among nonzero bins, a plateau
  // counting once.
  std::size_t train_peaks = 0;
  std::size_t validation_peaks = 0;

  // Metadata only; the scoring never uses it.
  double train_fraction = 0.0;
};

// Rank AUC of train vs validation scores with the mid-rank tie rule.
// Invariant under strictly increasing transforms of all scores, and
// separability(a, b) + separability(b, a) = 1. Throws ValueError when
// either list is empty.
double separability(const std::vector<double>& train_scores,
                    const std::vector<double>& validation_scores);

// Number of local maxima in a histogram, ignoring empty bins; a run of
// equal counts bounded by strictly smaller neighbors counts as one peak.
std::size_t count_peaks(const std::vector<double>& hist);

// Runs the attack: scores both sets with the checkpoint's discriminator
// (read-only, no gradients), rescales wasserstein critic values, builds
// the shared histograms, and computes the AUC. Agents must be encoded
// with the checkpoint's codec.
AttackReport mia_scores(const train::Checkpoint& c,
                        const std::vector<data::EncodedAgent>& train_set,
                        const std::vector<data::EncodedAgent>& validation_set);

nlohmann::ordered_json report_json(const AttackReport& r);

// CSV histogram table: bin bounds plus per-set counts and probabilities.
void write_histogram_csv(const std::filesystem::path& path,
                         const AttackReport& r);

}  // namespace tripsynth::attack

#endif  // TRIPSYNTH_ATTACK_HPP_
