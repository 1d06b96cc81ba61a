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

#include "tripsynth/eval.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "tripsynth/error.hpp"

namespace tripsynth::eval {
namespace {

using data::RawRecord;
using data::SurveySchema;
using data::VariableSpec;

// One resolved histogram axis: ordered bin labels plus a per-record bin
// extractor (one index per record for person axes, one per trip for trip
// axes).
struct Axis {
  std::string name;
  std::vector<std::string> labels;
  bool per_trip = false;
  std::function<void(const RawRecord&, std::vector<std::size_t>&)> bins_of;
};

std::size_t edge_bin(const std::vector<double>& edges, double v) {
  // Half-open bins with a closed last bin; out-of-range values land in the
  // boundary bins.
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  const std::size_t m = edges.size() - 1;
  if (it == edges.begin()) return 0;
  const std::size_t idx = static_cast<std::size_t>(it - edges.begin()) - 1;
  return idx >= m ? m - 1 : idx;
}

std::vector<std::string> edge_labels(const std::vector<double>& edges) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    out.push_back(
        data::bin_label(edges[i], edges[i + 1], i + 2 == edges.size()));
  }
  return out;
}

std::size_t label_bin(const VariableSpec& v, const std::string& label) {
  for (std::size_t i = 0; i < v.labels.size(); ++i) {
    if (v.labels[i] == label) return i;
  }
  throw SchemaError("variable " + v.name + " has no category " + label);
}

Axis schema_axis(const SurveySchema& schema, const VariableSpec& v) {
  Axis a;
  a.name = v.name;
  if (v.role == data::VarRole::kPerson) {
    const std::size_t idx = schema.person_index(v.name);
    if (v.is_label_kind()) {
      a.labels = v.labels;
      a.bins_of = [idx, v](const RawRecord& r, std::vector<std::size_t>& out) {
        const std::string* s = std::get_if<std::string>(&r.person[idx]);
        if (s == nullptr) {
          throw SchemaError("variable " + v.name + " expects a category label");
        }
        out.push_back(label_bin(v, *s));
      };
    } else {
      if (v.bin_edges.size() < 2) {
        throw SchemaError("variable " + v.name +
                          " has no bin edges to histogram by");
      }
      a.labels = edge_labels(v.bin_edges);
      const std::vector<double> edges = v.bin_edges;
      a.bins_of = [idx, edges, name = v.name](const RawRecord& r,
                                              std::vector<std::size_t>& out) {
        const double* x = std::get_if<double>(&r.person[idx]);
        if (x == nullptr) {
          throw SchemaError("variable " + name + " expects a number");
        }
        out.push_back(edge_bin(edges, *x));
      };
    }
    return a;
  }

  a.per_trip = true;
  const auto trips = schema.trip_vars();
  std::size_t slot = 0;
  while (slot < trips.size() && trips[slot]->name != v.name) ++slot;
  if (v.is_label_kind()) {
    a.labels = v.labels;
    a.bins_of = [v](const RawRecord& r, std::vector<std::size_t>& out) {
      for (const data::Trip& t : r.trips) out.push_back(label_bin(v, t.purpose));
    };
  } else {
    if (v.bin_edges.size() < 2) {
      throw SchemaError("variable " + v.name +
                        " has no bin edges to histogram by");
    }
    a.labels = edge_labels(v.bin_edges);
    const std::vector<double> edges = v.bin_edges;
    a.bins_of = [slot, edges](const RawRecord& r,
                              std::vector<std::size_t>& out) {
      for (const data::Trip& t : r.trips) {
        const double coords[4] = {t.ox, t.oy, t.dx, t.dy};
        out.push_back(edge_bin(edges, coords[slot]));
      }
    };
  }
  return a;
}

// Derived yes/no axis over an underlying status category.
Axis status_flag_axis(const SurveySchema& schema, const std::string& name,
                      const std::string& status_label) {
  const VariableSpec* statut = schema.find("P_STATUT");
  if (statut == nullptr || !statut->is_label_kind()) {
    throw SchemaError("derived variable " + name +
                      " needs a categorical P_STATUT column");
  }
  const std::size_t idx = schema.person_index("P_STATUT");
  Axis a;
  a.name = name;
  a.labels = {"yes", "no"};
  a.bins_of = [idx, status_label](const RawRecord& r,
                                  std::vector<std::size_t>& out) {
    const std::string* s = std::get_if<std::string>(&r.person[idx]);
    if (s == nullptr) throw SchemaError("P_STATUT expects a category label");
    out.push_back(*s == status_label ? 0 : 1);
  };
  return a;
}

Axis resolve_axis(const SurveySchema& schema, const std::string& variable) {
  if (const VariableSpec* v = schema.find(variable)) {
    Axis a = schema_axis(schema, *v);
    return a;
  }
  if (variable == "AgeGroup") {
    const VariableSpec* age = schema.find("P_AGE");
    if (age == nullptr || age->is_label_kind()) {
      throw SchemaError("derived variable AgeGroup needs a numeric P_AGE column");
    }
    Axis a = schema_axis(schema, *age);
    a.name = "AgeGroup";
    return a;
  }
  if (variable == "Gender") {
    const VariableSpec* sexe = schema.find("P_SEXE");
    if (sexe == nullptr || !sexe->is_label_kind()) {
      throw SchemaError("derived variable Gender needs a P_SEXE column");
    }
    Axis a = schema_axis(schema, *sexe);
    a.name = "Gender";
    return a;
  }
  if (variable == "Employed") {
    return status_flag_axis(schema, "Employed", "employed");
  }
  if (variable == "Educated") {
    return status_flag_axis(schema, "Educated", "student");
  }
  throw SchemaError("unknown variable " + variable);
}

Axis resolve_person_axis(const SurveySchema& schema,
                         const std::string& variable) {
  Axis a = resolve_axis(schema, variable);
  if (a.per_trip) {
    throw SchemaError("variable " + variable +
                      " is a trip variable; joint and conditional tables "
                      "take person variables");
  }
  return a;
}

void normalize(Histogram& h) {
  h.total = 0.0;
  for (double c : h.counts) h.total += c;
  h.probs.assign(h.counts.size(), 0.0);
  if (h.total > 0.0) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      h.probs[i] = h.counts[i] / h.total;
    }
    h.defined = true;
  } else {
    h.defined = false;
  }
}

double pearson_counts(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    return x == y ? 1.0 : 0.0;
  }
  return sxy / std::sqrt(sxx * syy);
}

double r_squared_counts(const std::vector<double>& est,
                        const std::vector<double>& ref) {
  const std::size_t n = ref.size();
  double mean = 0.0;
  for (double c : ref) mean += c;
  mean /= static_cast<double>(n);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ss_res += (est[i] - ref[i]) * (est[i] - ref[i]);
    ss_tot += (ref[i] - mean) * (ref[i] - mean);
  }
  if (ss_tot == 0.0) {
    return ss_res == 0.0 ? 1.0 : 0.0;
  }
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

Histogram make_histogram(std::vector<std::string> variables,
                         std::vector<std::string> labels,
                         std::vector<double> probabilities) {
  if (labels.size() != probabilities.size()) {
    throw ShapeError("label and probability counts differ");
  }
  Histogram h;
  h.variables = std::move(variables);
  h.labels = std::move(labels);
  h.counts = probabilities;
  h.valid.assign(h.labels.size(), true);
  h.probs = std::move(probabilities);
  h.total = 0.0;
  for (double p : h.probs) h.total += p;
  h.defined = h.total > 0.0;
  return h;
}

Histogram marginal(const std::vector<RawRecord>& records,
                   const SurveySchema& schema, const std::string& variable) {
  const Axis a = resolve_axis(schema, variable);
  Histogram h;
  h.variables = {a.name};
  h.labels = a.labels;
  h.counts.assign(a.labels.size(), 0.0);
  h.valid.assign(a.labels.size(), true);
  std::vector<std::size_t> bins;
  for (const RawRecord& r : records) {
    bins.clear();
    a.bins_of(r, bins);
    for (std::size_t b : bins) h.counts[b] += 1.0;
  }
  normalize(h);
  return h;
}

Histogram conditional(const std::vector<RawRecord>& records,
                      const SurveySchema& schema, const std::string& var_a,
                      const std::string& var_b) {
  const Axis a = resolve_person_axis(schema, var_a);
  const Axis b = resolve_person_axis(schema, var_b);
  const std::size_t na = a.labels.size(), nb = b.labels.size();

  Histogram h;
  h.variables = {a.name, b.name};
  h.labels.reserve(na * nb);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      h.labels.push_back(a.labels[i] + "|" + b.labels[j]);
    }
  }
  h.counts.assign(na * nb, 0.0);
  std::vector<std::size_t> ba, bb;
  for (const RawRecord& r : records) {
    ba.clear();
    bb.clear();
    a.bins_of(r, ba);
    b.bins_of(r, bb);
    h.counts[ba.front() * nb + bb.front()] += 1.0;
  }

  // Normalize within each conditioning value; empty columns are excluded
  // from comparisons.
  h.probs.assign(na * nb, 0.0);
  h.valid.assign(na * nb, true);
  h.total = 0.0;
  for (double c : h.counts) h.total += c;
  h.defined = h.total > 0.0;
  for (std::size_t j = 0; j < nb; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < na; ++i) col += h.counts[i * nb + j];
    for (std::size_t i = 0; i < na; ++i) {
      if (col > 0.0) {
        h.probs[i * nb + j] = h.counts[i * nb + j] / col;
      } else {
        h.valid[i * nb + j] = false;
      }
    }
  }
  return h;
}

Histogram joint(const std::vector<RawRecord>& records,
                const SurveySchema& schema,
                const std::vector<std::string>& variables,
                std::size_t bin_cap) {
  if (variables.empty()) throw ValueError("joint needs at least one variable");
  std::vector<Axis> axes;
  std::size_t bins = 1;
  for (const std::string& name : variables) {
    axes.push_back(resolve_person_axis(schema, name));
    const std::size_t width = axes.back().labels.size();
    if (bins > bin_cap / width) {
      throw CapacityError("joint over " + std::to_string(variables.size()) +
                          " variables exceeds the " + std::to_string(bin_cap) +
                          "-bin cap");
    }
    bins *= width;
  }

  Histogram h;
  for (const Axis& a : axes) h.variables.push_back(a.name);

  // Row-major labels in variable order.
  h.labels.assign(bins, std::string());
  for (std::size_t flat = 0; flat < bins; ++flat) {
    std::size_t rem = flat;
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t v = axes.size(); v-- > 0;) {
      idx[v] = rem % axes[v].labels.size();
      rem /= axes[v].labels.size();
    }
    std::string label = axes[0].labels[idx[0]];
    for (std::size_t v = 1; v < axes.size(); ++v) {
      label += "|" + axes[v].labels[idx[v]];
    }
    h.labels[flat] = std::move(label);
  }

  h.counts.assign(bins, 0.0);
  h.valid.assign(bins, true);
  std::vector<std::size_t> tmp;
  for (const RawRecord& r : records) {
    std::size_t flat = 0;
    for (const Axis& a : axes) {
      tmp.clear();
      a.bins_of(r, tmp);
      flat = flat * a.labels.size() + tmp.front();
    }
    h.counts[flat] += 1.0;
  }
  normalize(h);
  return h;
}

SrmseReport srmse(const Histogram& estimated, const Histogram& reference,
                  SrmseNormalizer norm, double agent_count) {
  if (estimated.labels != reference.labels) {
    throw ShapeError("histogram bin structures differ");
  }
  std::vector<double> est_p, ref_p, est_c, ref_c;
  for (std::size_t i = 0; i < reference.labels.size(); ++i) {
    if (!estimated.valid[i] || !reference.valid[i]) continue;
    est_p.push_back(estimated.probs[i]);
    ref_p.push_back(reference.probs[i]);
    est_c.push_back(estimated.counts[i]);
    ref_c.push_back(reference.counts[i]);
  }
  if (est_p.empty()) throw ValueError("no comparable bins");

  double denom = static_cast<double>(est_p.size());
  if (norm == SrmseNormalizer::kAgents) {
    if (!(agent_count > 0.0)) {
      throw ValueError("agent-count normalization needs a positive count");
    }
    denom = agent_count;
  }
  double sq = 0.0, ref_sum = 0.0;
  for (std::size_t i = 0; i < est_p.size(); ++i) {
    sq += (est_p[i] - ref_p[i]) * (est_p[i] - ref_p[i]);
    ref_sum += ref_p[i];
  }
  SrmseReport r;
  r.bins = est_p.size();
  const double mean_ref = ref_sum / denom;
  if (mean_ref == 0.0) throw ValueError("reference distribution is empty");
  r.srmse = std::sqrt(sq / denom) / mean_ref;
  r.pearson = pearson_counts(est_c, ref_c);
  r.r_squared = r_squared_counts(est_c, ref_c);
  return r;
}

PcaResult pca(const std::vector<data::EncodedAgent>& agents,
              const data::Codec& codec, std::size_t k) {
  const std::size_t n = agents.size();
  if (n < 2) throw ValueError("pca needs at least 2 agents");
  const std::size_t w = codec.tab_width();
  if (k < 1 || k > w) {
    throw ValueError("component count must lie in [1, " + std::to_string(w) +
                     "]");
  }

  std::vector<std::string> names;
  for (const data::VariableSpec* v : codec.schema().person_vars()) {
    if (v->is_label_kind()) {
      for (const std::string& l : v->labels) names.push_back(v->name + "=" + l);
    } else {
      names.push_back(v->name);
    }
  }

  // Column moments with the sample (n-1) variance.
  std::vector<double> mean(w, 0.0), var(w, 0.0);
  for (const data::EncodedAgent& a : agents) {
    if (a.tab.size() != w) {
      throw ShapeError("agent tabular width does not match the codec");
    }
    for (std::size_t j = 0; j < w; ++j) mean[j] += a.tab(j);
  }
  for (std::size_t j = 0; j < w; ++j) mean[j] /= static_cast<double>(n);
  for (const data::EncodedAgent& a : agents) {
    for (std::size_t j = 0; j < w; ++j) {
      const double d = a.tab(j) - mean[j];
      var[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < w; ++j) var[j] /= static_cast<double>(n - 1);

  PcaResult r;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < w; ++j) {
    if (var[j] > 0.0) {
      keep.push_back(j);
      r.columns.push_back(names[j]);
    } else {
      r.dropped.push_back(names[j]);
    }
  }
  const std::size_t d = keep.size();
  if (d == 0) throw ValueError("every encoded column has zero variance");
  if (k > d) {
    throw ValueError("component count " + std::to_string(k) +
                     " exceeds the " + std::to_string(d) +
                     " non-constant columns");
  }

  Eigen::MatrixXd Z(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (agents[i].tab(keep[j]) - mean[keep[j]]) / std::sqrt(var[keep[j]]);
    }
  }
  const Eigen::MatrixXd corr =
      (Z.transpose() * Z) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success) {
    throw ValueError("eigendecomposition failed to converge");
  }

  // Eigen returns ascending eigenvalues; emit descending with fixed signs.
  const Eigen::VectorXd evals = solver.eigenvalues();
  const Eigen::MatrixXd evecs = solver.eigenvectors();
  double trace = 0.0;
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    trace += std::max(0.0, evals(i));
  }

  r.components = Tensor({k, d});
  r.loadings = Tensor({k, d});
  for (std::size_t c = 0; c < k; ++c) {
    const Eigen::Index src = static_cast<Eigen::Index>(d - 1 - c);
    const double lambda = std::max(0.0, evals(src));
    r.eigenvalues.push_back(lambda);
    r.explained.push_back(trace > 0.0 ? lambda / trace : 0.0);
    double peak = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) {
      if (std::abs(evecs(j, src)) > std::abs(peak)) peak = evecs(j, src);
    }
    const double sign = peak < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = sign * evecs(static_cast<Eigen::Index>(j), src);
      r.components(c, j) = v;
      r.loadings(c, j) = v * std::sqrt(lambda);
    }
  }

  r.scores = Tensor({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        s += Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
             r.components(c, j);
      }
      r.scores(i, c) = s;
    }
  }
  return r;
}

std::vector<std::string> tour_bin_labels() {
  std::vector<std::string> labels;
  for (int b = 0; b < 30; ++b) {
    labels.push_back(data::bin_label(b, b + 1, false));
  }
  labels.push_back("[30,inf)");
  return labels;
}

TourLengthReport tour_lengths(const std::vector<RawRecord>& records) {
  TourLengthReport rep;
  rep.histogram.variables = {"tour_km"};
  rep.histogram.labels = tour_bin_labels();
  rep.histogram.counts.assign(31, 0.0);
  rep.histogram.valid.assign(31, true);
  for (const RawRecord& r : records) {
    for (const data::Trip& t : r.trips) {
      const double km = std::hypot(t.dx - t.ox, t.dy - t.oy) / 1000.0;
      rep.distances_km.push_back(km);
      const std::size_t bin =
          km < 30.0 ? static_cast<std::size_t>(km) : std::size_t{30};
      rep.histogram.counts[bin] += 1.0;
    }
  }
  normalize(rep.histogram);
  return rep;
}

void write_comparison_csv(const std::filesystem::path& path,
                          const Histogram& reference,
                          const Histogram& estimated) {
  if (reference.labels != estimated.labels) {
    throw ShapeError("histogram bin structures differ");
  }
  std::ostringstream out;
  out << "bin,reference_count,synthetic_count,reference_prob,synthetic_prob\n";
  for (std::size_t i = 0; i < reference.labels.size(); ++i) {
    out << reference.labels[i] << ','
        << data::format_double(reference.counts[i]) << ','
        << data::format_double(estimated.counts[i]) << ','
        << data::format_double(reference.probs[i]) << ','
        << data::format_double(estimated.probs[i]) << '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::string s = out.str();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw IoError("short write to " + path.string());
}

nlohmann::ordered_json comparison_json(const Histogram& reference,
                                       const Histogram& estimated,
                                       const SrmseReport& report) {
  nlohmann::ordered_json j;
  j["variables"] = reference.variables;
  j["bins"] = reference.labels;
  nlohmann::ordered_json ref;
  ref["counts"] = reference.counts;
  ref["probs"] = reference.probs;
  j["reference"] = ref;
  nlohmann::ordered_json est;
  est["counts"] = estimated.counts;
  est["probs"] = estimated.probs;
  j["synthetic"] = est;
  j["srmse"] = report.srmse;
  j["pearson"] = report.pearson;
  j["r_squared"] = report.r_squared;
  j["bins_compared"] = report.bins;
  return j;
}

void write_pca_csv(const std::filesystem::path& dir, const PcaResult& r) {
  const std::size_t k = r.components.shape[0];
  const std::size_t d = r.components.shape[1];

  const auto write = [&](const std::string& name, const std::string& body) {
    const std::filesystem::path path = dir / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!f) throw IoError("short write to " + path.string());
  };

  const auto matrix_csv = [&](const Tensor& m) {
    std::ostringstream out;
    out << "component";
    for (const std::string& c : r.columns) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < k; ++i) {
      out << "PC" << (i + 1);
      for (std::size_t j = 0; j < d; ++j) {
        out << ',' << data::format_double(m(i, j));
      }
      out << '\n';
    }
    return out.str();
  };

  write("pca_components.csv", matrix_csv(r.components));
  write("pca_loadings.csv", matrix_csv(r.loadings));

  {
    std::ostringstream out;
    out << "component,eigenvalue,explained_ratio\n";
    for (std::size_t i = 0; i < k; ++i) {
      out << "PC" << (i + 1) << ',' << data::format_double(r.eigenvalues[i])
          << ',' << data::format_double(r.explained[i]) << '\n';
    }
    write("pca_explained.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "agent";
    for (std::size_t c = 0; c < k; ++c) out << ",PC" << (c + 1);
    out << '\n';
    const std::size_t n = r.scores.shape[0];
    for (std::size_t i = 0; i < n; ++i) {
      out << i;
      for (std::size_t c = 0; c < k; ++c) {
        out << ',' << data::format_double(r.scores(i, c));
      }
      out << '\n';
    }
    write("pca_scores.csv", out.str());
  }
}

}  // namespace tripsynth::eval
