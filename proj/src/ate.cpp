#include "fpvio/eval/ate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace fpvio {

std::vector<std::pair<int, int>> associate(const Trajectory& est, const Trajectory& ref,
                                           double max_dt) {
  if (max_dt <= 0.0) throw std::invalid_argument("max_dt must be positive");
  const auto& e = est.samples;
  const auto& r = ref.samples;

  // Nearest reference index for each estimate (two-pointer sweep).
  std::vector<int> nearest(e.size(), -1);
  std::vector<double> gap(e.size(), 0.0);
  size_t j = 0;
  for (size_t i = 0; i < e.size(); ++i) {
    while (j + 1 < r.size() &&
           std::fabs(r[j + 1].first - e[i].first) <= std::fabs(r[j].first - e[i].first))
      ++j;
    const double d = std::fabs(r[j].first - e[i].first);
    if (d <= max_dt) {
      nearest[i] = static_cast<int>(j);
      gap[i] = d;
    }
  }

  // Resolve duplicate claims: smallest |dt| wins, earlier estimate on ties.
  std::vector<int> winner(r.size(), -1);
  for (size_t i = 0; i < e.size(); ++i) {
    if (nearest[i] < 0) continue;
    const int rj = nearest[i];
    if (winner[rj] < 0 || gap[i] < gap[winner[rj]]) winner[rj] = static_cast<int>(i);
  }

  std::vector<std::pair<int, int>> pairs;
  for (size_t rj = 0; rj < r.size(); ++rj)
    if (winner[rj] >= 0) pairs.push_back({winner[rj], static_cast<int>(rj)});
  std::sort(pairs.begin(), pairs.end());
  if (pairs.empty()) throw std::runtime_error("no overlap");
  return pairs;
}

Sim3 align_sim3(const Trajectory& est, const Trajectory& ref,
                const std::vector<std::pair<int, int>>& pairs) {
  if (pairs.size() < 3) throw std::runtime_error("degenerate geometry");
  const double n = static_cast<double>(pairs.size());

  Vec3 mean_e = Vec3::Zero(), mean_r = Vec3::Zero();
  for (const auto& [i, j] : pairs) {
    mean_e += est.samples[i].second.p;
    mean_r += ref.samples[j].second.p;
  }
  mean_e /= n;
  mean_r /= n;

  Mat3 cov = Mat3::Zero();
  double var_e = 0.0;
  for (const auto& [i, j] : pairs) {
    const Vec3 de = est.samples[i].second.p - mean_e;
    const Vec3 dr = ref.samples[j].second.p - mean_r;
    cov += dr * de.transpose();
    var_e += de.squaredNorm();
  }
  cov /= n;
  var_e /= n;

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  // Umeyama needs rank >= 2 (and non-coincident estimate points).
  if (var_e < 1e-18 || sv(1) < 1e-12 * std::max(sv(0), 1e-300))
    throw std::runtime_error("degenerate geometry");

  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1.0;

  Sim3 out;
  out.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  out.scale = (sv(0) * d(0, 0) + sv(1) * d(1, 1) + sv(2) * d(2, 2)) / var_e;
  if (out.scale <= 0.0) throw std::runtime_error("degenerate geometry");
  out.translation = mean_r - out.scale * out.rotation * mean_e;
  return out;
}

AteReport compute_ate(const Trajectory& est, const Trajectory& ref,
                      const std::vector<std::pair<int, int>>& pairs, const Sim3& alignment) {
  AteReport report;
  report.alignment = alignment;
  report.n_pairs = static_cast<int>(pairs.size());
  if (pairs.empty()) return report;

  std::vector<double> errors;
  errors.reserve(pairs.size());
  double sum_sq = 0.0;
  for (const auto& [i, j] : pairs) {
    const double e =
        (ref.samples[j].second.p - alignment.apply(est.samples[i].second.p)).norm();
    errors.push_back(e);
    sum_sq += e * e;
  }
  report.rmse = std::sqrt(sum_sq / errors.size());

  std::sort(errors.begin(), errors.end());
  const size_t m = errors.size();
  report.median = (m % 2 == 1) ? errors[m / 2] : 0.5 * (errors[m / 2 - 1] + errors[m / 2]);
  return report;
}

AteReport evaluate_ate(const Trajectory& est, const Trajectory& ref, double max_dt) {
  const auto pairs = associate(est, ref, max_dt);
  const Sim3 alignment = align_sim3(est, ref, pairs);
  return compute_ate(est, ref, pairs, alignment);
}

}  // namespace fpvio
