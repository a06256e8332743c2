#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fpvio/core/geometry.hpp"
#include "fpvio/core/random.hpp"
#include "fpvio/fpsp/render.hpp"
#include "fpvio/sim/sensors.hpp"
#include "fpvio/vo/matching.hpp"
#include "fpvio/vo/pose_estimation.hpp"
#include "fpvio/vo/system.hpp"
#include "fpvio/vo/two_view.hpp"

using namespace fpvio;

namespace {

BitDescriptor descriptor_from_bits(std::uint64_t bits) {
  BitDescriptor d;
  d.bits = bits & BitDescriptor::kMask;
  return d;
}

// Distinct descriptors with pairwise Hamming distance > 12.
std::vector<BitDescriptor> unique_descriptors(Rng& rng, int n) {
  std::vector<BitDescriptor> out;
  while (static_cast<int>(out.size()) < n) {
    BitDescriptor cand = descriptor_from_bits(rng.index(1ULL << 44));
    bool ok = true;
    for (const auto& d : out)
      if (hamming_distance(cand, d) <= 16) ok = false;
    if (ok) out.push_back(cand);
  }
  return out;
}

std::vector<Feature> shift_features(const std::vector<Feature>& in, int dx, int dy) {
  std::vector<Feature> out = in;
  for (auto& f : out) {
    f.event.x += dx;
    f.event.y += dy;
  }
  return out;
}

}  // namespace

TEST_CASE("match_features") {
  Rng rng(101);
  const auto descs = unique_descriptors(rng, 40);
  std::vector<Feature> features;
  std::vector<MatchReference> refs;
  for (int i = 0; i < 40; ++i) {
    Feature f;
    f.event = {20 + 5 * (i % 8) + (i / 8), 30 + 6 * (i / 8)};
    f.descriptor = descs[i];
    features.push_back(f);
    refs.push_back({Vec2(f.event.x, f.event.y), f.descriptor});
  }

  SUBCASE("identity on equal lists") {
    const auto m = match_features(features, refs, 4);
    REQUIRE(m.size() == features.size());
    for (size_t i = 0; i < m.size(); ++i) {
      CHECK(m[i].first == static_cast<int>(i));
      CHECK(m[i].second == static_cast<int>(i));
      CHECK(hamming_distance(features[m[i].first].descriptor,
                             refs[m[i].second].descriptor) == 0);
    }
  }

  SUBCASE("2 px shift stays inside radius 4") {
    const auto m = match_features(shift_features(features, 2, 0), refs, 4);
    CHECK(m.size() == features.size());
  }

  SUBCASE("7 px shift is outside radius 4") {
    const auto m = match_features(shift_features(features, 7, 0), refs, 4);
    CHECK(m.empty());
  }

  SUBCASE("hamming acceptance threshold") {
    std::vector<MatchReference> noisy = refs;
    // Flip 13 bits of one descriptor: beyond the acceptance threshold.
    noisy[3].descriptor.bits ^= (1ULL << 13) - 1;
    const auto m = match_features(features, noisy, 4);
    CHECK(m.size() == features.size() - 1);
    for (const auto& [i, j] : m) CHECK(i != 3);
  }

  SUBCASE("symmetry under role swap with unique descriptors") {
    Rng rng2(102);
    std::vector<Feature> a, b;
    const auto ds = unique_descriptors(rng2, 30);
    for (int i = 0; i < 30; ++i) {
      Feature fa, fb;
      fa.event = {10 + static_cast<int>(rng2.index(200)),
                  10 + static_cast<int>(rng2.index(200))};
      fb.event = {fa.event.x + static_cast<int>(rng2.index(5)) - 2,
                  fa.event.y + static_cast<int>(rng2.index(5)) - 2};
      fa.descriptor = ds[i];
      fb.descriptor = ds[i];
      a.push_back(fa);
      b.push_back(fb);
    }
    auto to_refs = [](const std::vector<Feature>& fs) {
      std::vector<MatchReference> rs;
      for (const auto& f : fs) rs.push_back({Vec2(f.event.x, f.event.y), f.descriptor});
      return rs;
    };
    const auto ab = match_features(a, to_refs(b), 4);
    auto ba = match_features(b, to_refs(a), 4);
    REQUIRE(ab.size() == ba.size());
    for (auto& [i, j] : ba) std::swap(i, j);
    std::sort(ba.begin(), ba.end());
    for (size_t k = 0; k < ab.size(); ++k) CHECK(ab[k] == ba[k]);
  }

  SUBCASE("radius precondition") {
    CHECK_THROWS_AS(match_features(features, refs, 0), std::invalid_argument);
    CHECK_THROWS_AS(match_features(features, refs, 11), std::invalid_argument);
  }
}

TEST_CASE("triangulate") {
  PinholeIntrinsics k;
  Pose cam0;  // at origin looking down +z
  Pose cam1;
  cam1.p = Vec3(0.2, 0, 0);

  SUBCASE("forward-project round trip") {
    const Vec3 x_true(0, 0, 2);
    const Vec2 px0 = k.project(pose_transform(cam0, x_true));
    const Vec2 px1 = k.project(pose_transform(cam1, x_true));
    const Vec3 x = triangulate(cam0, cam1, px0, px1, k);
    CHECK((x - x_true).norm() < 1e-9);
  }

  SUBCASE("random round trips") {
    Rng rng(105);
    for (int i = 0; i < 100; ++i) {
      Pose a{rng.gaussian_vec3(), rng.unit_quaternion()};
      Pose b{a.p + 0.3 * rng.gaussian_vec3().normalized(), rng.unit_quaternion()};
      const Vec3 x_true = pose_untransform(a, Vec3(rng.uniform(-0.5, 0.5),
                                                   rng.uniform(-0.5, 0.5),
                                                   rng.uniform(1.0, 4.0)));
      if (pose_transform(b, x_true).z() < 0.2) continue;
      const Vec2 px0 = k.project(pose_transform(a, x_true));
      const Vec2 px1 = k.project(pose_transform(b, x_true));
      if (px1.x() < -500 || px1.x() > 750 || px1.y() < -500 || px1.y() > 750) continue;
      try {
        const Vec3 x = triangulate(a, b, px0, px1, k);
        CHECK((x - x_true).norm() < 1e-9);
      } catch (const std::runtime_error&) {
        // near-degenerate draws are allowed to throw
      }
    }
  }

  SUBCASE("identical centers degenerate") {
    CHECK_THROWS_WITH_AS(
        triangulate(cam0, cam0, Vec2(127, 128), Vec2(130, 128), k),
        "degenerate rays", std::runtime_error);
  }

  SUBCASE("point behind the cameras") {
    const Vec3 behind(0.05, 0, -2.0);
    // Project the behind-camera point anyway (negative depth flips the px).
    const Vec3 c0 = pose_transform(cam0, behind);
    const Vec3 c1 = pose_transform(cam1, behind);
    const Vec2 px0 = k.project(c0);
    const Vec2 px1 = k.project(c1);
    CHECK_THROWS_WITH_AS(triangulate(cam0, cam1, px0, px1, k), "negative depth",
                         std::runtime_error);
  }
}

TEST_CASE("estimate_pose") {
  PinholeIntrinsics k;
  Rng rng(107);

  // Ground-truth pose and a cloud of points in view.
  VoPose truth;
  truth.p = Vec3(0.1, -0.2, 0.15);
  truth.q = small_angle_to_quat(Vec3(0.1, -0.05, 0.3));
  std::vector<PoseObservation> obs;
  for (int i = 0; i < 120; ++i) {
    const Vec3 x_cam(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(1.2, 3.0));
    const Vec3 x = truth.p + rotate_inverse(truth.q, x_cam);
    obs.push_back({x, k.project(x_cam)});
  }

  SUBCASE("zero-residual fixed point") {
    const VoPose out = estimate_pose(obs, truth, k);
    CHECK((out.p - truth.p).norm() < 1e-12);
    CHECK((out.q.coeffs_wxyz() - truth.q.coeffs_wxyz()).norm() < 1e-12);
  }

  SUBCASE("recovers from a perturbed start") {
    VoPose init = truth;
    init.p += Vec3(0.012, -0.01, 0.012);  // ~2 cm
    init.q = quat_mul(small_angle_to_quat(Vec3(0.01, 0.01, -0.008)), truth.q);  // ~1°
    const VoPose out = estimate_pose(obs, init, k);
    CHECK((out.p - truth.p).norm() < 1e-6);
    CHECK(quat_to_small_angle(quat_mul(out.q, quat_conjugate(truth.q))).norm() < 1e-5);
  }

  SUBCASE("cost never increases between accepted iterations") {
    VoPose init = truth;
    init.p += Vec3(0.02, 0.01, -0.02);
    init.q = quat_mul(small_angle_to_quat(Vec3(0.02, -0.01, 0.02)), truth.q);
    // Noisy observations so the optimum is not a zero-cost point.
    std::vector<PoseObservation> noisy = obs;
    for (auto& o : noisy) o.pixel += 0.4 * Vec2(rng.gaussian(), rng.gaussian());
    const double c0 = reprojection_cost(noisy, init, k, 1.5);
    const VoPose out = estimate_pose(noisy, init, k);
    CHECK(reprojection_cost(noisy, out, k, 1.5) <= c0 + 1e-9);
  }

  SUBCASE("robust to gross outliers") {
    Rng mc(211);
    double clean_err = 0.0, outlier_err = 0.0;
    const int trials = 25;
    for (int trial = 0; trial < trials; ++trial) {
      std::vector<PoseObservation> clean = obs;
      for (auto& o : clean) o.pixel += 0.3 * Vec2(mc.gaussian(), mc.gaussian());
      std::vector<PoseObservation> dirty = clean;
      for (size_t i = 0; i < dirty.size(); i += 5)  // 20% corrupted by 30 px
        dirty[i].pixel += Vec2(30.0 * (mc.uniform() < 0.5 ? 1 : -1),
                               30.0 * (mc.uniform() < 0.5 ? 1 : -1));
      VoPose init = truth;
      init.p += Vec3(0.005, -0.005, 0.005);
      clean_err += (estimate_pose(clean, init, k).p - truth.p).norm();
      outlier_err += (estimate_pose(dirty, init, k).p - truth.p).norm();
    }
    INFO("clean " << clean_err / trials << " outliers " << outlier_err / trials);
    CHECK(outlier_err < 3.0 * clean_err);
  }

  SUBCASE("underdetermined below 6 matches") {
    std::vector<PoseObservation> five(obs.begin(), obs.begin() + 5);
    CHECK_THROWS_WITH_AS(estimate_pose(five, truth, k), "underdetermined",
                         std::invalid_argument);
  }

  SUBCASE("diverges when everything is behind the camera") {
    VoPose flipped = truth;
    flipped.q = quat_mul(small_angle_to_quat(Vec3(0, M_PI * 0.999, 0)), truth.q);
    CHECK_THROWS_WITH_AS(estimate_pose(obs, flipped, k), "diverged", std::runtime_error);
  }
}

TEST_CASE("pose_covariance") {
  PinholeIntrinsics k;
  Rng rng(109);
  VoPose truth;
  truth.p = Vec3(-0.1, 0.2, 0.05);
  truth.q = small_angle_to_quat(Vec3(-0.2, 0.1, 0.4));

  auto make_obs = [&](int n, double sigma, Rng& noise_rng) {
    std::vector<PoseObservation> obs;
    for (int i = 0; i < n; ++i) {
      const Vec3 x_cam(noise_rng.uniform(-0.8, 0.8), noise_rng.uniform(-0.8, 0.8),
                       noise_rng.uniform(1.2, 3.0));
      const Vec3 x = truth.p + rotate_inverse(truth.q, x_cam);
      Vec2 px = k.project(x_cam);
      px += sigma * Vec2(noise_rng.gaussian(), noise_rng.gaussian());
      obs.push_back({x, px});
    }
    return obs;
  };

  SUBCASE("covariance equals sigma^2 (JtJ)^-1") {
    Rng noise_rng(301);
    const auto obs = make_obs(80, 0.3, noise_rng);
    const VoPose opt = estimate_pose(obs, truth, k);
    const PoseCovariance cov = pose_covariance(obs, opt, k);
    CHECK((cov - cov.transpose()).norm() < 1e-15);
    Eigen::SelfAdjointEigenSolver<Mat6> eig(cov);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);

    // Σ·(JᵀJ) must equal σ̂²·I — the identity behind the orthonormal-J case.
    Mat6 jtj = Mat6::Zero();
    double cost = 0.0;
    for (const auto& o : obs) {
      const Eigen::Matrix<double, 2, 6> j = reprojection_jacobian(o.point, opt, k);
      const Vec2 e = o.pixel - k.project(rotate(opt.q, o.point - opt.p));
      const double s = e.squaredNorm();
      const double w = s <= 1.5 * 1.5 ? 1.0 : 1.5 / std::sqrt(s);
      cost += s <= 1.5 * 1.5 ? s : 2 * 1.5 * std::sqrt(s) - 1.5 * 1.5;
      jtj += w * j.transpose() * j;
    }
    const double sigma_sq = cost / (2.0 * obs.size() - 6.0);
    const Mat6 product = cov * jtj / sigma_sq;
    CHECK((product - Mat6::Identity()).norm() < 1e-9);
  }

  SUBCASE("scaling pixel noise by s scales the covariance by s^2") {
    Rng a(401);
    const auto clean = make_obs(100, 0.0, a);
    // Same noise realization at two scales, small enough to stay quadratic.
    Rng n1(402);
    std::vector<PoseObservation> obs1 = clean, obs2 = clean;
    for (size_t i = 0; i < clean.size(); ++i) {
      const Vec2 n(n1.gaussian(), n1.gaussian());
      obs1[i].pixel += 0.1 * n;
      obs2[i].pixel += 0.2 * n;
    }
    const VoPose opt1 = estimate_pose(obs1, truth, k);
    const VoPose opt2 = estimate_pose(obs2, truth, k);
    const PoseCovariance c1 = pose_covariance(obs1, opt1, k);
    const PoseCovariance c2 = pose_covariance(obs2, opt2, k);
    CHECK((c2 - 4.0 * c1).norm() < 0.05 * c2.norm());
  }

  SUBCASE("jacobian matches central finite differences") {
    Rng noise_rng(403);
    for (int trial = 0; trial < 100; ++trial) {
      VoPose pose;
      pose.p = 0.3 * noise_rng.gaussian_vec3();
      pose.q = noise_rng.unit_quaternion();
      const Vec3 x_cam(noise_rng.uniform(-0.6, 0.6), noise_rng.uniform(-0.6, 0.6),
                       noise_rng.uniform(1.0, 3.0));
      const Vec3 x = pose.p + rotate_inverse(pose.q, x_cam);

      const Eigen::Matrix<double, 2, 6> analytic = reprojection_jacobian(x, pose, k);
      Eigen::Matrix<double, 2, 6> fd;
      const double eps = 1e-7;
      for (int d = 0; d < 6; ++d) {
        Vec6 delta = Vec6::Zero();
        delta[d] = eps;
        auto apply = [&](const Vec6& dx) {
          VoPose p2 = pose;
          p2.p += dx.head<3>();
          p2.q = quat_mul(small_angle_to_quat(dx.tail<3>()), pose.q);
          return k.project(rotate(p2.q, x - p2.p));
        };
        fd.col(d) = (apply(delta) - apply(-delta)) / (2.0 * eps);
      }
      CHECK((analytic - fd).norm() / fd.norm() < 1e-5);
    }
  }

  SUBCASE("rank deficient on collinear points") {
    std::vector<PoseObservation> line;
    for (int i = 0; i < 20; ++i) {
      const Vec3 x_cam(0.0, 0.0, 1.0 + 0.1 * i);  // along the optical axis
      const Vec3 x = truth.p + rotate_inverse(truth.q, x_cam);
      line.push_back({x, k.project(x_cam)});
    }
    CHECK_THROWS_WITH_AS(pose_covariance(line, truth, k), "rank deficient",
                         std::runtime_error);
  }
}

TEST_CASE("initialize_map") {
  PinholeIntrinsics k;
  Rng rng(113);

  // Scene of distinct descriptors on a wall of points; two views with a
  // lateral baseline.
  auto make_view = [&](const std::vector<Vec3>& points,
                       const std::vector<BitDescriptor>& descs, const Pose& cam) {
    std::vector<Feature> out;
    for (size_t i = 0; i < points.size(); ++i) {
      const Vec3 x = pose_transform(cam, points[i]);
      if (x.z() < 0.1) continue;
      const Vec2 px = k.project(x);
      if (px.x() < 4 || px.x() > 251 || px.y() < 4 || px.y() > 251) continue;
      Feature f;
      f.event = {static_cast<int>(std::lround(px.x())),
                 static_cast<int>(std::lround(px.y()))};
      f.descriptor = descs[i];
      out.push_back(f);
    }
    return out;
  };

  std::vector<Vec3> points;
  const auto descs = unique_descriptors(rng, 150);
  for (int i = 0; i < 150; ++i)
    points.push_back(Vec3(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9),
                          rng.uniform(1.2, 3.5)));

  SUBCASE("pure lateral translation recovered") {
    Pose cam0;
    Pose cam1;
    cam1.p = Vec3(0.1, 0, 0);
    const auto f0 = make_view(points, descs, cam0);
    const auto f1 = make_view(points, descs, cam1);
    REQUIRE(static_cast<int>(f0.size()) >= 100);

    const TwoViewInit init = initialize_map(f0, f1, k);
    CHECK(init.relative.p.norm() == doctest::Approx(1.0).epsilon(1e-9));
    const double dir_err =
        std::acos(std::clamp(init.relative.p.normalized().dot(Vec3(1, 0, 0)), -1.0, 1.0));
    CHECK(dir_err < 0.5 * M_PI / 180.0);
    const double rot_err =
        quat_to_small_angle(quat_mul(init.relative.q, quat_conjugate(Quat::identity())))
            .norm();
    CHECK(rot_err < 0.1 * M_PI / 180.0);
    CHECK(init.points.size() >= 40);
    // The map reproduces the scene depths up to the baseline scale (0.06 m
    // baseline maps to the unit translation).
    std::vector<double> zs;
    for (const auto& mp : init.points) zs.push_back(mp.position.z());
    std::sort(zs.begin(), zs.end());
    std::vector<double> ref_zs;
    for (const auto& p : points) ref_zs.push_back(p.z() / 0.1);
    std::sort(ref_zs.begin(), ref_zs.end());
    const double med = zs[zs.size() / 2];
    const double ref_med = ref_zs[ref_zs.size() / 2];
    CHECK(std::fabs(med - ref_med) < 0.05 * ref_med);
  }

  SUBCASE("pure rotation has no parallax") {
    Pose cam0;
    Pose cam1;
    cam1.q = small_angle_to_quat(Vec3(0, 0.03, 0));
    const auto f0 = make_view(points, descs, cam0);
    const auto f1 = make_view(points, descs, cam1);
    CHECK_THROWS_WITH_AS(initialize_map(f0, f1, k), "insufficient parallax",
                         std::runtime_error);
  }

  SUBCASE("too few matches") {
    Pose cam0;
    Pose cam1;
    cam1.p = Vec3(0.1, 0, 0);
    std::vector<Vec3> few(points.begin(), points.begin() + 20);
    std::vector<BitDescriptor> few_d(descs.begin(), descs.begin() + 20);
    const auto f0 = make_view(few, few_d, cam0);
    const auto f1 = make_view(few, few_d, cam1);
    CHECK_THROWS_WITH_AS(initialize_map(f0, f1, k), "insufficient matches",
                         std::invalid_argument);
  }
}
