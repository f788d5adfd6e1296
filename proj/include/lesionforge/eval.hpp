#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lesionforge {

struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;  // 1 = anomalous (positive), 0 = normal
  std::vector<std::string> ids;  // optional, aligned when present

  std::size_t positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  }
  std::size_t negatives() const { return labels.size() - positives(); }

  void validate() const {
    if (scores.size() != labels.size())
      throw std::invalid_argument("scores and labels differ in length");
    if (!ids.empty() && ids.size() != scores.size())
      throw std::invalid_argument("ids and scores differ in length");
    for (int l : labels)
      if (l != 0 && l != 1) throw std::invalid_argument("labels must be 0 or 1");
    for (double s : scores)
      if (std::isnan(s)) throw std::invalid_argument("score is NaN");
  }

  void require_both_classes() const {
    validate();
    if (positives() == 0 || negatives() == 0)
      throw std::domain_error("AUC undefined: both labels must be present");
  }
};

// 1-based ranks with ties sharing their average rank.
inline std::vector<double> midranks(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

// Mann-Whitney AUC with ties credited 0.5, via the positive-class rank sum.
inline double auc(const ScoredSet& s) {
  s.require_both_classes();
  const auto ranks = midranks(s.scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (s.labels[i] == 1) rank_sum += ranks[i];
  const double m = static_cast<double>(s.positives());
  const double n = static_cast<double>(s.negatives());
  return (rank_sum - m * (m + 1.0) / 2.0) / (m * n);
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// One point per distinct score threshold, from (0,0) to (1,1).
inline std::vector<RocPoint> roc_curve(const ScoredSet& s) {
  s.require_both_classes();
  std::vector<std::size_t> order(s.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.scores[a] > s.scores[b]; });
  const double m = static_cast<double>(s.positives());
  const double n = static_cast<double>(s.negatives());
  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    const double threshold = s.scores[order[i]];
    while (i < order.size() && s.scores[order[i]] == threshold) {
      if (s.labels[order[i]] == 1)
        ++tp;
      else
        ++fp;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / n, static_cast<double>(tp) / m});
  }
  return curve;
}

inline double trapezoid_area(const std::vector<RocPoint>& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  return area;
}

struct DeLongResult {
  double auc_a = 0.0;
  double auc_b = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  double covariance = 0.0;
  double z = 0.0;
  double p_value = 1.0;  // two-sided
};

namespace eval_detail {

// Structural components of one classifier: V10 per positive, V01 per negative.
struct Placements {
  double auc = 0.0;
  std::vector<double> v10;
  std::vector<double> v01;
};

inline Placements placements(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(scores[i]);
  const double m = static_cast<double>(pos.size());
  const double n = static_cast<double>(neg.size());

  std::vector<double> all = pos;
  all.insert(all.end(), neg.begin(), neg.end());
  const auto r_all = midranks(all);
  const auto r_pos = midranks(pos);
  const auto r_neg = midranks(neg);

  Placements p;
  p.v10.resize(pos.size());
  p.v01.resize(neg.size());
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    p.v10[i] = (r_all[i] - r_pos[i]) / n;
    rank_sum += r_all[i];
  }
  for (std::size_t j = 0; j < neg.size(); ++j)
    p.v01[j] = 1.0 - (r_all[pos.size() + j] - r_neg[j]) / m;
  p.auc = (rank_sum - m * (m + 1.0) / 2.0) / (m * n);
  return p;
}

inline double sample_covariance(const std::vector<double>& a, const std::vector<double>& b,
                                double mean_a, double mean_b) {
  if (a.size() < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - mean_a) * (b[i] - mean_b);
  return acc / static_cast<double>(a.size() - 1);
}

}  // namespace eval_detail

// Variance of a single AUC estimate by DeLong's placement-value method.
inline double delong_variance(const ScoredSet& s) {
  s.require_both_classes();
  const auto p = eval_detail::placements(s.scores, s.labels);
  const double s10 = eval_detail::sample_covariance(p.v10, p.v10, p.auc, p.auc);
  const double s01 = eval_detail::sample_covariance(p.v01, p.v01, p.auc, p.auc);
  return s10 / static_cast<double>(p.v10.size()) + s01 / static_cast<double>(p.v01.size());
}

// Paired comparison of two classifiers scored on the same samples.
inline DeLongResult delong_test(const ScoredSet& a, const ScoredSet& b) {
  a.require_both_classes();
  b.require_both_classes();
  if (a.labels != b.labels) throw std::invalid_argument("DeLong test needs identically labeled samples");
  const auto pa = eval_detail::placements(a.scores, a.labels);
  const auto pb = eval_detail::placements(b.scores, b.labels);
  const double m = static_cast<double>(pa.v10.size());
  const double n = static_cast<double>(pa.v01.size());
  using eval_detail::sample_covariance;

  DeLongResult r;
  r.auc_a = pa.auc;
  r.auc_b = pb.auc;
  r.var_a = sample_covariance(pa.v10, pa.v10, pa.auc, pa.auc) / m +
            sample_covariance(pa.v01, pa.v01, pa.auc, pa.auc) / n;
  r.var_b = sample_covariance(pb.v10, pb.v10, pb.auc, pb.auc) / m +
            sample_covariance(pb.v01, pb.v01, pb.auc, pb.auc) / n;
  r.covariance = sample_covariance(pa.v10, pb.v10, pa.auc, pb.auc) / m +
                 sample_covariance(pa.v01, pb.v01, pa.auc, pb.auc) / n;

  const double diff = r.auc_a - r.auc_b;
  const double var = r.var_a + r.var_b - 2.0 * r.covariance;
  if (var <= 0.0) {
    if (diff == 0.0) {
      r.z = 0.0;
      r.p_value = 1.0;
    } else {
      r.z = diff > 0 ? INFINITY : -INFINITY;
      r.p_value = 0.0;
    }
    return r;
  }
  r.z = diff / std::sqrt(var);
  r.p_value = std::erfc(std::abs(r.z) / std::sqrt(2.0));
  return r;
}

// ---- CSV contract: header "id,score,label" ---------------------------------

inline ScoredSet read_scores_csv(std::istream& in) {
  ScoredSet s;
  std::string line;
  if (!std::getline(in, line)) return s;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,score,label") throw std::invalid_argument("score CSV header must be id,score,label");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw std::invalid_argument("score CSV line " + std::to_string(lineno) + ": expected 3 fields");
    try {
      std::size_t used = 0;
      const std::string score = line.substr(c1 + 1, c2 - c1 - 1);
      const double v = std::stod(score, &used);
      if (used != score.size()) throw std::invalid_argument("trailing characters");
      const std::string label = line.substr(c2 + 1);
      if (label != "0" && label != "1") throw std::invalid_argument("label must be 0 or 1");
      s.ids.push_back(line.substr(0, c1));
      s.scores.push_back(v);
      s.labels.push_back(label == "1" ? 1 : 0);
    } catch (const std::exception& e) {
      throw std::invalid_argument("score CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  s.validate();
  return s;
}

inline ScoredSet read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_scores_csv(in);
}

// Reorders `b` to follow `a`'s ids; every id must occur in both exactly once.
inline ScoredSet align_by_id(const ScoredSet& a, const ScoredSet& b) {
  if (a.ids.size() != b.ids.size()) throw std::invalid_argument("score files list different samples");
  std::vector<std::size_t> order(b.ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return b.ids[x] < b.ids[y]; });
  for (std::size_t k = 1; k < order.size(); ++k)
    if (b.ids[order[k]] == b.ids[order[k - 1]])
      throw std::invalid_argument("duplicate sample id '" + b.ids[order[k]] + "'");
  ScoredSet out;
  for (const auto& id : a.ids) {
    auto it = std::lower_bound(order.begin(), order.end(), id,
                               [&](std::size_t k, const std::string& v) { return b.ids[k] < v; });
    if (it == order.end() || b.ids[*it] != id)
      throw std::invalid_argument("sample '" + id + "' missing from second score file");
    out.ids.push_back(id);
    out.scores.push_back(b.scores[*it]);
    out.labels.push_back(b.labels[*it]);
  }
  return out;
}

}  // namespace lesionforge
