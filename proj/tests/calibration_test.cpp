// Copyright 2026 The vrmeet Authors
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

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>

#include "vrmeet/calibration.hpp"
#include "vrmeet/errors.hpp"
#include "support.hpp"

namespace vrmeet {
namespace {

using test::catch_error;
using test::PoseNear;
using test::VecNear;

constexpr double kRecoveryTol = 1e-6;

PoseGraphMeasurement edge(std::string from, std::string to, Pose rel, double w = 1.0) {
  return {std::move(from), std::move(to), rel, w};
}

PoseGraphMeasurement measure(const PoseMap& truth, const std::string& a, const std::string& b) {
  return edge(a, b, compose(invert(truth.at(a)), truth.at(b)));
}

// Largest pairwise relative-pose error between two pose sets over the same ids.
double max_pairwise_error(const PoseMap& est, const PoseMap& truth) {
  double worst = 0.0;
  for (const auto& [a, pa] : truth) {
    for (const auto& [b, pb] : truth) {
      const Pose rt = compose(invert(pa), pb);
      const Pose re = compose(invert(est.at(a)), est.at(b));
      worst = std::max(worst, test::pose_distance(rt, re));
    }
  }
  return worst;
}

// Random connected graph: a random tree plus extra edges, random directions.
std::vector<PoseGraphMeasurement> random_graph(std::mt19937_64& rng, const PoseMap& truth,
                                               double extra_edge_p) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : truth) ids.push_back(id);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<PoseGraphMeasurement> out;
  std::set<std::pair<std::string, std::string>> used;
  auto add = [&](const std::string& a, const std::string& b) {
    if (used.contains({a, b}) || used.contains({b, a})) return;
    used.insert({a, b});
    out.push_back(rng() % 2 ? measure(truth, a, b) : measure(truth, b, a));
  };
  for (std::size_t i = 1; i < ids.size(); ++i) add(ids[rng() % i], ids[i]);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (test::uniform(rng, 0, 1) < extra_edge_p) add(ids[i], ids[j]);
    }
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

PoseMap random_truth(std::mt19937_64& rng, int n) {
  PoseMap truth;
  for (int i = 0; i < n; ++i) truth["vp" + std::to_string(i)] = test::random_pose(rng, 4.0);
  return truth;
}

// ---- spanning_tree_init ----------------------------------------------------

TEST(SpanningTreeInit, SingleEdge) {
  const auto init = spanning_tree_init({edge("A", "B", Pose::translation(2, 0, 0))});
  EXPECT_EQ(init.at("A"), Pose::identity());
  EXPECT_TRUE(PoseNear(init.at("B"), Pose::translation(2, 0, 0), 0.0));
}

TEST(SpanningTreeInit, Chain) {
  const auto init = spanning_tree_init(
      {edge("A", "B", Pose::translation(1, 0, 0)), edge("B", "C", Pose::translation(1, 0, 0))});
  EXPECT_TRUE(PoseNear(init.at("C"), Pose::translation(2, 0, 0), 1e-15));
}

TEST(SpanningTreeInit, ReverseEdgeUsesInverse) {
  const Pose ab{{1, 0, 0.5}, rot_y(30)};
  const Pose cb{{0, 2, 0}, rot_x(45)};
  const auto init = spanning_tree_init({edge("A", "B", ab), edge("C", "B", cb)});
  // Hand composition: B = A * ab, C = B * inverse(cb).
  const Eigen::Matrix4d c = test::matrix_of(ab) * test::matrix_of(cb).inverse();
  EXPECT_LE((test::matrix_of(init.at("C")) - c).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(PoseNear(init.at("C"), compose(ab, invert(cb)), 1e-12));
}

TEST(SpanningTreeInit, AnchorIsSmallestId) {
  const auto init = spanning_tree_init({edge("zeta", "beta", Pose::translation(1, 0, 0)),
                                        edge("beta", "alpha", Pose::translation(0, 1, 0))});
  EXPECT_EQ(init.at("alpha"), Pose::identity());
  EXPECT_TRUE(PoseNear(init.at("zeta"), Pose::translation(-1, -1, 0), 1e-15));
}

TEST(SpanningTreeInit, Errors) {
  EXPECT_EQ(catch_error([] { spanning_tree_init({}); }).code(), Errc::empty_input);
  const Error d = catch_error([] {
    spanning_tree_init({edge("A", "B", Pose::identity()), edge("C", "D", Pose::identity()),
                        edge("E", "D", Pose::identity())});
  });
  EXPECT_EQ(d.code(), Errc::disconnected_graph);
  EXPECT_EQ(d.subject(), "C,D,E");
  EXPECT_EQ(catch_error([] { spanning_tree_init({edge("A", "A", Pose::identity())}); }).code(),
            Errc::invalid_input);
  EXPECT_EQ(
      catch_error([] { spanning_tree_init({edge("A", "B", Pose::identity(), 0.0)}); }).code(),
      Errc::invalid_input);
}

// ---- residual_rms ------------------------------------------------------------

TEST(ResidualRms, ConsistentChainIsZero) {
  const std::vector m{edge("A", "B", Pose::translation(1, 0, 0)),
                      edge("B", "C", Pose::translation(1, 0, 0))};
  EXPECT_LE(residual_rms(spanning_tree_init(m), m), 1e-12);
}

TEST(ResidualRms, SingleEdgeOffset) {
  const PoseMap poses{{"A", Pose::identity()}, {"B", Pose::translation(1.1, 0, 0)}};
  EXPECT_NEAR(residual_rms(poses, {edge("A", "B", Pose::translation(1, 0, 0))}), 0.1, 1e-12);
}

TEST(ResidualRms, WeightNormalized) {
  const PoseMap poses{{"A", Pose::identity()},
                      {"B", {{1.1, 0.0, 0.0}, rot_z(3)}},
                      {"C", Pose::translation(0, 2.05, 0)}};
  std::vector m{edge("A", "B", Pose::translation(1, 0, 0), 1.0),
                edge("A", "C", Pose::translation(0, 2, 0), 3.0)};
  const double base = residual_rms(poses, m);
  for (auto& e : m) e.weight *= 2.0;
  EXPECT_NEAR(residual_rms(poses, m), base, 1e-15);
  // Hand evaluation: (1*(0.1^2 + (3 deg)^2) + 3*0.05^2) / 4.
  const double th = 3.0 * test::kPi / 180.0;
  EXPECT_NEAR(base, std::sqrt((0.01 + th * th + 3 * 0.0025) / 4.0), 1e-12);
}

TEST(ResidualRms, MissingPose) {
  const Error e = catch_error([] {
    residual_rms({{"A", Pose::identity()}}, {edge("A", "B", Pose::identity())});
  });
  EXPECT_EQ(e.code(), Errc::unknown_id);
  EXPECT_EQ(e.subject(), "B");
}

// ---- refine_poses --------------------------------------------------------------

TEST(RefinePoses, ConsistentTriangle) {
  const std::vector m{edge("A", "B", Pose::translation(1, 0, 0)),
                      edge("B", "C", Pose::translation(0, 1, 0)),
                      edge("A", "C", Pose::translation(1, 1, 0))};
  const auto r = align_viewpoints(m);
  EXPECT_LE(r.residual_rms, 1e-9);
  EXPECT_EQ(r.poses.at("A"), Pose::identity());
  EXPECT_TRUE(PoseNear(r.poses.at("B"), Pose::translation(1, 0, 0), kRecoveryTol));
  EXPECT_TRUE(PoseNear(r.poses.at("C"), Pose::translation(1, 1, 0), kRecoveryTol));
}

TEST(RefinePoses, OptimalInitIsFixedPoint) {
  const std::vector m{edge("A", "B", {{1, 0, 0}, rot_y(10)}),
                      edge("B", "C", {{0, 1, 0}, rot_x(-20)})};
  const auto init = spanning_tree_init(m);
  const auto r = refine_poses(init, m);
  EXPECT_LE(r.iterations_used, 2);
  for (const auto& [id, p] : init) EXPECT_TRUE(PoseNear(r.poses.at(id), p, 1e-10)) << id;
}

// Planar pose (x, y, yaw) cost for the contradictory triangle, evaluated
// independently of the library: A fixed at the origin, residual =
// predicted minus measured translation in the source frame, plus yaw gap.
double planar_triangle_cost(const std::array<double, 6>& q) {
  struct P { double x, y, th; };
  const P a{0, 0, 0}, b{q[0], q[1], q[2]}, c{q[3], q[4], q[5]};
  auto edge_cost = [](P i, P j, double mx, double my) {
    const double dx = j.x - i.x, dy = j.y - i.y;
    const double tx = std::cos(i.th) * dx + std::sin(i.th) * dy;
    const double ty = -std::sin(i.th) * dx + std::cos(i.th) * dy;
    const double dth = j.th - i.th;
    return (tx - mx) * (tx - mx) + (ty - my) * (ty - my) + dth * dth;
  };
  return edge_cost(a, b, 1, 0) + edge_cost(b, c, 0, 1) + edge_cost(a, c, 1.2, 1);
}

TEST(RefinePoses, ContradictoryTriangleMatchesGridSearch) {
  const std::vector m{edge("A", "B", Pose::translation(1, 0, 0)),
                      edge("B", "C", Pose::translation(0, 1, 0)),
                      edge("A", "C", Pose::translation(1.2, 1, 0))};
  const auto r = align_viewpoints(m);

  // Translation-only subproblem: rotations identity, y consistent, so only
  // B.x and C.x are free. Exhaustive 2-D grid, then a finer pass.
  auto rms = [](double bx, double cx) {
    const double e1 = bx - 1.0, e2 = cx - bx, e3 = cx - 1.2;
    return std::sqrt((e1 * e1 + e2 * e2 + e3 * e3) / 3.0);
  };
  double best = 1e9, best_b = 0, best_c = 0;
  for (double step : {1e-3, 1e-5}) {
    const double b0 = step == 1e-3 ? 0.5 : best_b - 2e-3;
    const double c0 = step == 1e-3 ? 0.5 : best_c - 2e-3;
    const int n = step == 1e-3 ? 1000 : 400;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double b = b0 + i * step, c = c0 + j * step;
        const double v = rms(b, c);
        if (v < best) best = v, best_b = b, best_c = c;
      }
    }
  }
  EXPECT_NEAR(best, 0.2 / 3.0, 1e-6);
  EXPECT_NEAR(best_c, 1.2 - 0.2 / 3.0, 1e-4);

  // Rotations are free in the real problem and absorb part of the
  // contradiction, so the translation-only optimum is an upper bound.
  EXPECT_GT(r.residual_rms, 0.0);
  EXPECT_LE(r.residual_rms, best + 1e-12);

  // All measurements lie in the z = 0 plane, so the optimum is planar.
  // Derivative-free pattern search over (B.x, B.y, B.yaw, C.x, C.y, C.yaw).
  std::array<double, 6> q{1, 0, 0, 1, 1, 0};
  double cost = planar_triangle_cost(q);
  for (double step = 0.05; step > 1e-9;) {
    bool improved = false;
    for (int k = 0; k < 6; ++k) {
      for (double dir : {step, -step}) {
        auto t = q;
        t[k] += dir;
        const double v = planar_triangle_cost(t);
        if (v < cost) cost = v, q = t, improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  const double planar_rms = std::sqrt(cost / 3.0);
  EXPECT_NEAR(r.residual_rms, planar_rms, 1e-3);

  const Pose b = r.poses.at("B"), c = r.poses.at("C");
  EXPECT_NEAR(b.position.x, q[0], 1e-3);
  EXPECT_NEAR(b.position.y, q[1], 1e-3);
  EXPECT_NEAR(c.position.x, q[3], 1e-3);
  EXPECT_NEAR(c.position.y, q[4], 1e-3);
  EXPECT_NEAR(b.position.z, 0.0, 1e-9);
  EXPECT_NEAR(c.position.z, 0.0, 1e-9);
  // Final C lies between the two consistent solutions (x = 1 and x = 1.2).
  EXPECT_GT(c.position.x, 1.0);
  EXPECT_LT(c.position.x, 1.2);
}

TEST(RefinePoses, InitMustCoverIds) {
  const Error e = catch_error([] {
    refine_poses({{"A", Pose::identity()}}, {edge("A", "B", Pose::translation(1, 0, 0))});
  });
  EXPECT_EQ(e.code(), Errc::invalid_input);
}

TEST(RefinePoses, ResidualNeverIncreasesAcrossIterations) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const PoseMap truth = random_truth(rng, 6);
    auto m = random_graph(rng, truth, 0.6);
    std::normal_distribution<double> noise(0.0, 0.05);
    for (auto& e : m) {
      e.relative.position = e.relative.position + Vec3{noise(rng), noise(rng), noise(rng)};
      e.relative.orientation =
          e.relative.orientation *
          UnitQuat::from_rotation_vector({noise(rng), noise(rng), noise(rng)});
    }
    const auto init = spanning_tree_init(m);
    double prev = residual_rms(init, m);
    for (int k = 1; k <= 12; ++k) {
      const auto r = refine_poses(init, m, {k, 0.0});
      ASSERT_LE(r.residual_rms, prev + 1e-12) << "trial " << trial << " iteration " << k;
      prev = r.residual_rms;
    }
  }
}

// ---- properties -------------------------------------------------------------

TEST(CalibrationProperty, ExactRecoveryOnRandomGraphs) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const PoseMap truth = random_truth(rng, n);
    const auto m = random_graph(rng, truth, 0.4);
    const auto r = align_viewpoints(m);
    ASSERT_EQ(r.poses.size(), truth.size());
    EXPECT_EQ(r.poses.begin()->second, Pose::identity());
    ASSERT_LE(max_pairwise_error(r.poses, truth), kRecoveryTol) << "trial " << trial;
  }
}

TEST(CalibrationProperty, GaugeInvariance) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const PoseMap truth = random_truth(rng, 5);
    const Pose g = test::random_pose(rng, 10.0);
    PoseMap moved;
    for (const auto& [id, p] : truth) moved[id] = compose(g, p);
    const auto a = align_viewpoints(random_graph(rng, truth, 0.5));
    const auto b = align_viewpoints(random_graph(rng, moved, 0.5));
    ASSERT_LE(max_pairwise_error(a.poses, b.poses), kRecoveryTol) << trial;
  }
}

TEST(CalibrationProperty, NoisyCompleteGraphWithinThreeSigma) {
  constexpr double kSigma = 0.01;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, kSigma);
  double total = 0.0;
  int count = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const PoseMap truth = random_truth(rng, 5);
    std::vector<PoseGraphMeasurement> m;
    for (auto a = truth.begin(); a != truth.end(); ++a) {
      for (auto b = std::next(a); b != truth.end(); ++b) {
        auto e = measure(truth, a->first, b->first);
        e.relative.position = e.relative.position + Vec3{noise(rng), noise(rng), noise(rng)};
        m.push_back(e);
      }
    }
    const auto r = align_viewpoints(m);
    const Pose anchor_inv = invert(truth.begin()->second);
    for (const auto& [id, p] : truth) {
      if (id == truth.begin()->first) continue;
      total += (r.poses.at(id).position - compose(anchor_inv, p).position).norm();
      ++count;
    }
  }
  const double mean = total / count;
  EXPECT_LE(mean, 3 * kSigma) << "mean translation error " << mean;
}

TEST(CalibrationProperty, RefineNeverWorseThanInit) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int trial = 0; trial < 50; ++trial) {
    const PoseMap truth = random_truth(rng, 2 + static_cast<int>(rng() % 7));
    auto m = random_graph(rng, truth, 0.5);
    for (auto& e : m) {
      e.relative.position = e.relative.position + Vec3{noise(rng), noise(rng), noise(rng)};
      e.weight = test::uniform(rng, 0.2, 3.0);
    }
    const auto init = spanning_tree_init(m);
    ASSERT_LE(refine_poses(init, m).residual_rms, residual_rms(init, m) + 1e-12) << trial;
  }
}

// ---- measurement files ----------------------------------------------------------

TEST(MeasurementFile, ParseAndRoundTrip) {
  const auto m = parse_measurements(R"([
    {"from": "a", "to": "b", "pose": {"pos": [1, 0, 0], "quat": [1, 0, 0, 0]}, "weight": 2.5},
    {"from": "b", "to": "c", "pose": {"pos": [0, 1, 0], "quat": [0.7071067811865476, 0, 0.7071067811865476, 0]}}
  ])");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].weight, 2.5);
  EXPECT_EQ(m[1].weight, 1.0);
  EXPECT_LE(angular_distance(m[1].relative.orientation, rot_y(90)), 1e-15);
  EXPECT_EQ(parse_measurements(serialize_measurements(m)), m);
}

TEST(MeasurementFile, SchemaErrors) {
  const Error e = catch_error([] { parse_measurements(R"([{"from": "a", "to": "b"}])"); });
  EXPECT_EQ(e.code(), Errc::schema);
  EXPECT_EQ(e.subject(), "[0].pose");
  EXPECT_EQ(catch_error([] { parse_measurements("{}"); }).code(), Errc::schema);
  EXPECT_EQ(catch_error([] { parse_measurements("[1,"); }).code(), Errc::syntax);
}

}  // namespace
}  // namespace vrmeet
