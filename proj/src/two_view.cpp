#include "fpvio/vo/two_view.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "fpvio/core/geometry.hpp"
#include "fpvio/core/random.hpp"
#include "fpvio/vo/matching.hpp"

namespace fpvio {
namespace {

// Normalized 8-point estimate of E from unit-plane coordinates.
Mat3 eight_point(const std::vector<Vec2>& u0, const std::vector<Vec2>& u1,
                 const std::vector<int>& idx) {
  auto normalize = [](const std::vector<Vec2>& pts, const std::vector<int>& sel, Mat3& t) {
    Vec2 mean = Vec2::Zero();
    for (const int i : sel) mean += pts[i];
    mean /= sel.size();
    double scale = 0.0;
    for (const int i : sel) scale += (pts[i] - mean).norm();
    scale = std::sqrt(2.0) * sel.size() / std::max(scale, 1e-12);
    t << scale, 0, -scale * mean.x(), 0, scale, -scale * mean.y(), 0, 0, 1;
  };
  Mat3 t0, t1;
  normalize(u0, idx, t0);
  normalize(u1, idx, t1);

  MatX a(static_cast<int>(idx.size()), 9);
  for (size_t r = 0; r < idx.size(); ++r) {
    const int i = idx[r];
    const Vec3 p0 = t0 * Vec3(u0[i].x(), u0[i].y(), 1.0);
    const Vec3 p1 = t1 * Vec3(u1[i].x(), u1[i].y(), 1.0);
    a.row(r) << p1.x() * p0.x(), p1.x() * p0.y(), p1.x(), p1.y() * p0.x(), p1.y() * p0.y(),
        p1.y(), p0.x(), p0.y(), 1.0;
  }
  Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 1> e = svd.matrixV().col(8);
  Mat3 f;
  f << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);
  f = (t1.transpose() * f * t0).eval();

  // Project onto the essential manifold.
  Eigen::JacobiSVD<Mat3> esvd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double s = 0.5 * (esvd.singularValues()(0) + esvd.singularValues()(1));
  return esvd.matrixU() * Eigen::DiagonalMatrix<double, 3>(s, s, 0.0) *
         esvd.matrixV().transpose();
}

double sampson_sq(const Mat3& e, const Vec2& u0, const Vec2& u1) {
  const Vec3 x0(u0.x(), u0.y(), 1.0), x1(u1.x(), u1.y(), 1.0);
  const Vec3 ex0 = e * x0;
  const Vec3 etx1 = e.transpose() * x1;
  const double num = x1.dot(ex0);
  const double den = ex0.head<2>().squaredNorm() + etx1.head<2>().squaredNorm();
  return num * num / std::max(den, 1e-300);
}

// Linear-least-squares depth pair for rays d0, d1 from centers c0, c1.
bool ray_depths(const Vec3& c0, const Vec3& d0, const Vec3& c1, const Vec3& d1, double* s,
                double* t) {
  const double a = d0.dot(d0), b = d0.dot(d1), c = d1.dot(d1);
  const Vec3 w = c1 - c0;
  const double det = a * c - b * b;
  if (std::fabs(det) < 1e-14) return false;
  *s = (c * d0.dot(w) - b * d1.dot(w)) / det;
  *t = (b * d0.dot(w) - a * d1.dot(w)) / det;
  return true;
}

}  // namespace

Vec3 triangulate(const Pose& pose0, const Pose& pose1, const Vec2& px0, const Vec2& px1,
                 const PinholeIntrinsics& intrinsics) {
  const Vec3 c0 = pose0.p, c1 = pose1.p;
  if ((c0 - c1).norm() < 1e-12) throw std::runtime_error("degenerate rays");
  const Vec3 d0 = rotate_inverse(pose0.q, intrinsics.unproject(px0)).normalized();
  const Vec3 d1 = rotate_inverse(pose1.q, intrinsics.unproject(px1)).normalized();
  const double cos_angle = std::clamp(d0.dot(d1), -1.0, 1.0);
  if (std::acos(std::fabs(cos_angle)) < 0.2 * M_PI / 180.0)
    throw std::runtime_error("degenerate rays");

  double s = 0, t = 0;
  if (!ray_depths(c0, d0, c1, d1, &s, &t)) throw std::runtime_error("degenerate rays");
  const Vec3 x = 0.5 * ((c0 + s * d0) + (c1 + t * d1));
  if (pose_transform(pose0, x).z() <= 0.0 || pose_transform(pose1, x).z() <= 0.0)
    throw std::runtime_error("negative depth");
  return x;
}

TwoViewInit initialize_map(const std::vector<Feature>& frame0,
                           const std::vector<Feature>& frame1,
                           const PinholeIntrinsics& intrinsics, const InitOptions& opts) {
  // Correspondences by descriptor matching around the (larger) init radius.
  std::vector<MatchReference> ref;
  ref.reserve(frame0.size());
  for (const auto& f : frame0)
    ref.push_back({Vec2(f.event.x, f.event.y), f.descriptor});
  const auto matches = match_features(frame1, ref, opts.match_radius);
  if (static_cast<int>(matches.size()) < opts.min_matches)
    throw std::invalid_argument("insufficient matches");

  std::vector<Vec2> u0, u1;       // unit-plane coordinates
  std::vector<Vec2> px0, px1;     // pixels
  for (const auto& [i1, i0] : matches) {
    px0.push_back(Vec2(frame0[i0].event.x, frame0[i0].event.y));
    px1.push_back(Vec2(frame1[i1].event.x, frame1[i1].event.y));
    u0.push_back(intrinsics.unproject(px0.back()).head<2>());
    u1.push_back(intrinsics.unproject(px1.back()).head<2>());
  }

  // RANSAC over 8-point samples, scored by Sampson distance.
  const int n = static_cast<int>(u0.size());
  const double thresh =
      (opts.ransac_threshold_px / (0.5 * (intrinsics.fx + intrinsics.fy)));
  const double thresh_sq = thresh * thresh;
  Rng rng(opts.seed);
  Mat3 best_e = Mat3::Zero();
  int best_inliers = -1;
  for (int iter = 0; iter < opts.ransac_iterations; ++iter) {
    std::vector<int> sample;
    while (static_cast<int>(sample.size()) < 8) {
      const int cand = static_cast<int>(rng.index(n));
      if (std::find(sample.begin(), sample.end(), cand) == sample.end())
        sample.push_back(cand);
    }
    const Mat3 e = eight_point(u0, u1, sample);
    int inliers = 0;
    for (int i = 0; i < n; ++i)
      if (sampson_sq(e, u0[i], u1[i]) < thresh_sq) ++inliers;
    if (inliers > best_inliers) {
      best_inliers = inliers;
      best_e = e;
    }
  }
  if (best_inliers < opts.min_inlier_ratio * n)
    throw std::runtime_error("initialization failed");

  // Refit on all inliers.
  std::vector<int> inlier_idx;
  for (int i = 0; i < n; ++i)
    if (sampson_sq(best_e, u0[i], u1[i]) < thresh_sq) inlier_idx.push_back(i);
  if (static_cast<int>(inlier_idx.size()) >= 8) best_e = eight_point(u0, u1, inlier_idx);

  // Decompose E into the four (R, t) candidates and pick by cheirality.
  Eigen::JacobiSVD<Mat3> svd(best_e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU(), v = svd.matrixV();
  if (u.determinant() < 0) u = -u;
  if (v.determinant() < 0) v = -v;
  Mat3 w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Mat3 r_cands[2] = {u * w * v.transpose(), u * w.transpose() * v.transpose()};
  const Vec3 t_cands[2] = {u.col(2), -u.col(2)};

  const Pose identity_pose;
  Pose best_pose;
  int best_count = -1;
  for (const auto& r : r_cands) {
    for (const auto& t : t_cands) {
      Pose cand;
      cand.q = rot_to_quat(r);
      cand.p = -r.transpose() * t;  // x_c1 = R x_c0 + t
      int count = 0;
      for (const int i : inlier_idx) {
        try {
          triangulate(identity_pose, cand, px0[i], px1[i], intrinsics);
          ++count;
        } catch (const std::runtime_error&) {
        }
      }
      if (count > best_count) {
        best_count = count;
        best_pose = cand;
      }
    }
  }
  best_pose.p.normalize();  // ‖t‖ = 1 defines the unscaled unit

  // Parallax gate on the triangulated geometry: the median ray angle of the
  // inliers, in pixel equivalents. A rotation-only pair fits an essential
  // matrix perfectly but triangulates at (near-)zero angles and fails here.
  std::vector<double> angles;
  for (const int i : inlier_idx) {
    double angle = 0.0;
    try {
      const Vec3 x = triangulate(identity_pose, best_pose, px0[i], px1[i], intrinsics);
      const Vec3 d0 = x.normalized();
      const Vec3 d1 = (x - best_pose.p).normalized();
      angle = std::acos(std::clamp(d0.dot(d1), -1.0, 1.0));
    } catch (const std::runtime_error&) {
    }
    angles.push_back(angle);
  }
  std::nth_element(angles.begin(), angles.begin() + angles.size() / 2, angles.end());
  const double median_parallax_px =
      angles[angles.size() / 2] * 0.5 * (intrinsics.fx + intrinsics.fy);
  if (median_parallax_px < opts.min_parallax_px)
    throw std::runtime_error("insufficient parallax");

  TwoViewInit out;
  out.relative = best_pose;
  out.median_parallax_px = median_parallax_px;
  std::int64_t next_id = 0;
  for (const int i : inlier_idx) {
    Vec3 x;
    try {
      x = triangulate(identity_pose, best_pose, px0[i], px1[i], intrinsics);
    } catch (const std::runtime_error&) {
      continue;
    }
    // Reprojection sanity in both views.
    const double e0 = (intrinsics.project(x) - px0[i]).norm();
    const double e1 =
        (intrinsics.project(pose_transform(best_pose, x)) - px1[i]).norm();
    if (e0 > 2.0 || e1 > 2.0) continue;
    MapPoint mp;
    mp.id = next_id++;
    mp.position = x;
    mp.descriptor = frame1[matches[i].first].descriptor;
    mp.observation_count = 2;
    out.points.push_back(mp);
    out.inlier_matches.push_back({matches[i].second, matches[i].first});
  }
  return out;
}

}  // namespace fpvio
