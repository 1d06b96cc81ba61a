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

#include "tripsynth/attack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tripsynth/error.hpp"

namespace tripsynth::attack {
namespace {

// Mid-ranks over the pooled scores, doubled so ties stay integral and the
// rank sums are exact.
double rank_sum_doubled(const std::vector<double>& pooled,
                        const std::vector<std::size_t>& order,
                        std::size_t n_train) {
  double sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           pooled[order[j + 1]] == pooled[order[i]]) {
      ++j;
    }
    // 1-based ranks i+1 .. j+1 share the mid-rank; doubled mid-rank = i+j+2.
    const double doubled = static_cast<double>(i + j + 2);
    for (std::size_t t = i; t <= j; ++t) {
      if (order[t] < n_train) sum += doubled;
    }
    i = j + 1;
  }
  return sum;
}

std::size_t bin_of(double v, double lo, double width) {
  const auto b = static_cast<std::size_t>(
      std::max(0.0, std::floor((v - lo) / width)));
  return b >= kHistogramBins ? kHistogramBins - 1 : b;
}

}  // namespace

double separability(const std::vector<double>& train_scores,
                    const std::vector<double>& validation_scores) {
  if (train_scores.empty() || validation_scores.empty()) {
    throw ValueError("separability needs two nonempty score lists");
  }
  const std::size_t nt = train_scores.size();
  const std::size_t nv = validation_scores.size();
  std::vector<double> pooled;
  pooled.reserve(nt + nv);
  pooled.insert(pooled.end(), train_scores.begin(), train_scores.end());
  pooled.insert(pooled.end(), validation_scores.begin(),
                validation_scores.end());
  for (double s : pooled) {
    if (!std::isfinite(s)) throw ValueError("scores must be finite");
  }

  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pooled[a] < pooled[b];
  });

  // Mann-Whitney: U = R_train - nt(nt+1)/2, AUC = U / (nt * nv). All terms
  // are exact integers at double precision, so auc(a,b) + auc(b,a) = 1.
  const double doubled_rank_sum = rank_sum_doubled(pooled, order, nt);
  const double doubled_u =
      doubled_rank_sum - static_cast<double>(nt) * static_cast<double>(nt + 1);
  return doubled_u / (2.0 * static_cast<double>(nt) * static_cast<double>(nv));
}

std::size_t count_peaks(const std::vector<double>& hist) {
  std::size_t peaks = 0;
  std::size_t i = 0;
  while (i < hist.size()) {
    if (hist[i] <= 0.0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < hist.size() && hist[j + 1] == hist[i]) ++j;
    const double left = i == 0 ? 0.0 : hist[i - 1];
    const double right = j + 1 == hist.size() ? 0.0 : hist[j + 1];
    if (hist[i] > left && hist[i] > right) ++peaks;
    i = j + 1;
  }
  return peaks;
}

AttackReport mia_scores(const train::Checkpoint& c,
                        const std::vector<data::EncodedAgent>& train_set,
                        const std::vector<data::EncodedAgent>& validation_set) {
  if (train_set.empty() || validation_set.empty()) {
    throw ValueError("attack needs nonempty train and validation sets");
  }
  AttackReport r;
  r.train_scores = train::discriminator_scores(c, train_set);
  r.validation_scores = train::discriminator_scores(c, validation_set);
  r.train_fraction =
      static_cast<double>(train_set.size()) /
      static_cast<double>(train_set.size() + validation_set.size());

  if (c.cfg.wasserstein) {
    // Min-max rescale pooled critic values to [0, 1]; a constant scorer
    // maps to 0.5.
    double lo = r.train_scores.front(), hi = lo;
    for (const auto* scores : {&r.train_scores, &r.validation_scores}) {
      for (double s : *scores) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
    }
    const double range = hi - lo;
    for (auto* scores : {&r.train_scores, &r.validation_scores}) {
      for (double& s : *scores) {
        s = range > 0.0 ? (s - lo) / range : 0.5;
      }
    }
  }

  r.auc = separability(r.train_scores, r.validation_scores);

  double lo = r.train_scores.front(), hi = lo;
  for (const auto* scores : {&r.train_scores, &r.validation_scores}) {
    for (double s : *scores) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  if (hi <= lo) {
    lo -= 0.5;
    hi = lo + 1.0;
  }
  const double width = (hi - lo) / static_cast<double>(kHistogramBins);
  r.bin_edges.resize(kHistogramBins + 1);
  for (std::size_t b = 0; b <= kHistogramBins; ++b) {
    r.bin_edges[b] = lo + static_cast<double>(b) * width;
  }
  r.bin_edges[kHistogramBins] = hi;

  r.train_hist.assign(kHistogramBins, 0.0);
  r.validation_hist.assign(kHistogramBins, 0.0);
  for (double s : r.train_scores) r.train_hist[bin_of(s, lo, width)] += 1.0;
  for (double s : r.validation_scores) {
    r.validation_hist[bin_of(s, lo, width)] += 1.0;
  }
  r.train_peaks = count_peaks(r.train_hist);
  r.validation_peaks = count_peaks(r.validation_hist);
  return r;
}

nlohmann::ordered_json report_json(const AttackReport& r) {
  nlohmann::ordered_json j;
  j["auc"] = r.auc;
  j["train_fraction"] = r.train_fraction;
  j["train_scores"] = r.train_scores;
  j["validation_scores"] = r.validation_scores;
  j["bin_edges"] = r.bin_edges;
  const auto probs = [](const std::vector<double>& counts,
                        std::size_t n) {
    std::vector<double> p(counts.size(), 0.0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      p[i] = counts[i] / static_cast<double>(n);
    }
    return p;
  };
  nlohmann::ordered_json tr;
  tr["counts"] = r.train_hist;
  tr["probs"] = probs(r.train_hist, r.train_scores.size());
  tr["peaks"] = r.train_peaks;
  j["train_histogram"] = tr;
  nlohmann::ordered_json va;
  va["counts"] = r.validation_hist;
  va["probs"] = probs(r.validation_hist, r.validation_scores.size());
  va["peaks"] = r.validation_peaks;
  j["validation_histogram"] = va;
  return j;
}

void write_histogram_csv(const std::filesystem::path& path,
                         const AttackReport& r) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,train_count,validation_count,train_prob,"
         "validation_prob\n";
  const double nt = static_cast<double>(r.train_scores.size());
  const double nv = static_cast<double>(r.validation_scores.size());
  for (std::size_t b = 0; b < kHistogramBins; ++b) {
    out << data::format_double(r.bin_edges[b]) << ','
        << data::format_double(r.bin_edges[b + 1]) << ','
        << data::format_double(r.train_hist[b]) << ','
        << data::format_double(r.validation_hist[b]) << ','
        << data::format_double(nt > 0.0 ? r.train_hist[b] / nt : 0.0) << ','
        << data::format_double(nv > 0.0 ? r.validation_hist[b] / nv : 0.0)
        << '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::string s = out.str();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw IoError("short write to " + path.string());
}

}  // namespace tripsynth::attack
