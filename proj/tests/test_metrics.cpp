// Copyright 2026 The Cornerkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cornerkit/error.hpp"
#include "cornerkit/metrics.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cornerkit;
constexpr double kPi = std::numbers::pi;

namespace {

Box3D make(double x, double y, double w, double l, double yaw = 0.0, int cls = 0, double z = 0.0,
           double h = 1.0) {
  Box3D b;
  b.center = {x, y, z};
  b.dims = {w, l, h};
  b.yaw = yaw;
  b.class_id = cls;
  return b;
}

double mc_bev_iou(const Box3D& a, const Box3D& b, int samples, std::uint64_t seed) {
  cktest::Gen gen(seed);
  const double ra = std::hypot(a.dims.w, a.dims.l) / 2, rb = std::hypot(b.dims.w, b.dims.l) / 2;
  const double x0 = std::min(a.center.x - ra, b.center.x - rb), x1 = std::max(a.center.x + ra, b.center.x + rb);
  const double y0 = std::min(a.center.y - ra, b.center.y - rb), y1 = std::max(a.center.y + ra, b.center.y + rb);
  Box3D fa = a, fb = b;
  fa.center.z = fb.center.z = 0;
  fa.dims.h = fb.dims.h = 1;
  int in_a = 0, in_b = 0, both = 0;
  for (int i = 0; i < samples; ++i) {
    const Vec3 p{gen.uniform(x0, x1), gen.uniform(y0, y1), 0};
    const bool ia = cktest::inside_oracle(p, fa), ib = cktest::inside_oracle(p, fb);
    in_a += ia;
    in_b += ib;
    both += ia && ib;
  }
  const int uni = in_a + in_b - both;
  return uni == 0 ? 0.0 : double(both) / uni;
}

// AP from the definition: mean over recall points of the best precision at
// any rank whose recall reaches that point.
double ap_oracle(const std::vector<bool>& tp_in_rank_order, int num_gt) {
  double acc = 0;
  for (int k = 1; k <= 50; ++k) {
    const double r = 0.02 * k;
    double best = 0;
    int tp = 0;
    for (std::size_t i = 0; i < tp_in_rank_order.size(); ++i) {
      tp += tp_in_rank_order[i];
      if (double(tp) / num_gt >= r - 1e-12) best = std::max(best, double(tp) / (i + 1));
    }
    acc += best;
  }
  return acc / 50;
}

std::vector<RankedDetection> ranked(const std::vector<bool>& labels) {
  std::vector<RankedDetection> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({1.0 - 0.01 * i, labels[i], 1.0});
  return out;
}

EvalConfig single_class(double thr = 0.5) {
  EvalConfig c;
  c.class_names = {"A"};
  c.iou_thresholds = {thr};
  return c;
}

}  // namespace

TEST_CASE("IoU basic values") {
  const Box3D a = make(0, 0, 1, 1);
  CHECK(iou_bev(a, a) == 1.0);
  CHECK(iou_3d(a, a) == 1.0);
  CHECK(iou_bev(a, make(5, 0, 1, 1)) == 0.0);
  CHECK(iou_bev(a, make(0.5, 0, 1, 1)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(mc_bev_iou(a, make(0.5, 0, 1, 1), 1000000, 1) == doctest::Approx(1.0 / 3.0).epsilon(3e-3));
  // Same box described with yaw shifted by 2 pi.
  CHECK(iou_bev(make(1, 2, 2, 4, 0.3), make(1, 2, 2, 4, 0.3 + 2 * kPi)) == doctest::Approx(1.0));
  // Touching edges share no area.
  CHECK(iou_bev(a, make(1, 0, 1, 1)) == doctest::Approx(0.0).epsilon(1e-12));
  // Containment: area ratio.
  CHECK(iou_bev(make(0, 0, 4, 4), make(0.5, 0.5, 2, 2, 0.7)) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("3D IoU uses the vertical overlap") {
  const Box3D a = make(0, 0, 2, 2, 0, 0, 0.0, 2.0);
  const Box3D b = make(0, 0, 2, 2, 0, 0, 1.0, 2.0);
  // Intersection 4 * 1, union 8 + 8 - 4.
  CHECK(iou_3d(a, b) == doctest::Approx(4.0 / 12.0).epsilon(1e-12));
  CHECK(iou_3d(a, make(0, 0, 2, 2, 0, 0, 5.0, 2.0)) == 0.0);
  CHECK(iou_bev(a, b) == 1.0);
}

TEST_CASE("IoU is symmetric and invariant under rigid motion") {
  cktest::Gen gen(61);
  for (int i = 0; i < 300; ++i) {
    Box3D a = gen.box(1.5), b = gen.box(1.5);
    const double ab = iou_bev(a, b), ba = iou_bev(b, a);
    CHECK(std::abs(ab - ba) < 1e-12);
    CHECK(std::abs(iou_3d(a, b) - iou_3d(b, a)) < 1e-12);
    CHECK((ab >= 0.0 && ab <= 1.0));
    const double t = gen.uniform(-kPi, kPi), c = std::cos(t), s = std::sin(t);
    for (Box3D* box : {&a, &b}) {
      const Vec3 p = box->center;
      box->center = {c * p.x - s * p.y + 7, s * p.x + c * p.y - 3, p.z};
      box->yaw += t;
    }
    CHECK(std::abs(iou_bev(a, b) - ab) < 1e-9);
  }
}

TEST_CASE("rotated IoU agrees with Monte Carlo area estimates") {
  cktest::Gen gen(62);
  for (int i = 0; i < 20; ++i) {
    const Box3D a = gen.box(1.0), b = gen.box(1.0);
    CHECK(std::abs(iou_bev(a, b) - mc_bev_iou(a, b, 200000, 100 + i)) < 5e-3);
  }
}

TEST_CASE("polygon helpers") {
  const std::vector<Point2> sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(polygon_area(sq) == 4.0);
  const std::vector<Point2> tri{{1, -1}, {3, 1}, {1, 3}};
  CHECK(polygon_area(clip_convex(sq, tri)) == doctest::Approx(polygon_area(clip_convex(tri, sq))));
}

TEST_CASE("matching: exact detection is a TP, a flipped heading is an FP") {
  const EvalConfig cfg = single_class(0.7);
  const Box3D gt = make(10, 2, 2, 4, 0.4);
  const std::vector<GroundTruth> gts{{gt, std::nullopt}};
  FrameMatch m = match_detections(std::vector<Detection>{{gt, 0.9}}, gts, cfg);
  CHECK(m.detections[0].label == MatchLabel::kTruePositive);
  CHECK(m.gt_matched[0]);

  Box3D flipped = gt;
  flipped.yaw = normalize_angle(gt.yaw + kPi);
  m = match_detections(std::vector<Detection>{{flipped, 0.9}}, gts, cfg);
  CHECK(m.detections[0].label == MatchLabel::kFalsePositive);
  CHECK(m.detections[0].orientation_rejected);
  CHECK_FALSE(m.gt_matched[0]);

  EvalConfig no_gate = cfg;
  no_gate.orientation_gate = false;
  CHECK(match_detections(std::vector<Detection>{{flipped, 0.9}}, gts, no_gate).detections[0].label ==
        MatchLabel::kTruePositive);

  // Just inside the gate still matches.
  Box3D turned = gt;
  turned.yaw = gt.yaw + kPi / 2 - 1e-6;
  EvalConfig bev = no_gate;
  bev.orientation_gate = true;
  bev.iou_thresholds = {0.3};
  CHECK(match_detections(std::vector<Detection>{{turned, 0.9}}, gts, bev).detections[0].heading_error < kPi / 2);
}

namespace {

// Greedy assignment written independently of the library: visit detections
// by descending score (stable), pick the free GT with the highest IoU.
std::vector<int> greedy_oracle(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                               double thr) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dets[a].score > dets[b].score; });
  std::vector<int> label(dets.size(), -1);
  std::vector<bool> used(gts.size(), false);
  for (int d : order) {
    int best = -1;
    double best_iou = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g]) continue;
      const double iou = iou_3d(dets[d].box, gts[g].box);
      if (iou >= thr && (best < 0 || iou > best_iou)) {
        best = int(g);
        best_iou = iou;
      }
    }
    if (best < 0) continue;
    if (heading_difference(dets[d].box.yaw, gts[best].box.yaw) > kPi / 2) continue;
    used[best] = true;
    label[d] = best;
  }
  return label;
}

}  // namespace

TEST_CASE("matching equals the greedy oracle on random scenes") {
  cktest::Gen gen(63);
  const EvalConfig cfg = single_class(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GroundTruth> gts;
    for (int g = 0; g < 5; ++g) gts.push_back({make(gen.uniform(-3, 3), gen.uniform(-3, 3), 1.8, 4, gen.uniform(-3, 3)), {}});
    std::vector<Detection> dets;
    for (int d = 0; d < 10; ++d) {
      Box3D b = gts[gen.integer(0, 4)].box;
      b.center.x += gen.uniform(-0.8, 0.8);
      b.center.y += gen.uniform(-0.8, 0.8);
      b.yaw += gen.uniform(-2.5, 2.5);
      dets.push_back({b, std::round(gen.uniform(0, 1) * 10) / 10});  // coarse scores create ties
    }
    const FrameMatch m = match_detections(dets, gts, cfg);
    const std::vector<int> want = greedy_oracle(dets, gts, 0.3);
    for (std::size_t d = 0; d < dets.size(); ++d) {
      CHECK((m.detections[d].label == MatchLabel::kTruePositive) == (want[d] >= 0));
      if (want[d] >= 0) CHECK(m.detections[d].gt_index == want[d]);
    }
  }
}

TEST_CASE("matching respects classes") {
  EvalConfig cfg = single_class(0.5);
  cfg.class_names = {"A", "B"};
  cfg.iou_thresholds = {0.5, 0.5};
  const Box3D b = make(0, 0, 2, 2, 0, 1);
  Box3D wrong = b;
  wrong.class_id = 0;
  const FrameMatch m = match_detections(std::vector<Detection>{{wrong, 0.9}}, std::vector<GroundTruth>{{b, {}}}, cfg);
  CHECK(m.detections[0].label == MatchLabel::kFalsePositive);
}

TEST_CASE("average precision: trivial cases and the hand-computed case") {
  const RecallGrid grid;
  CHECK(average_precision(ranked({true, true, true}), 3, grid).ap == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(average_precision({}, 3, grid).ap == 0.0);
  CHECK_FALSE(average_precision({}, 0, grid).defined);

  const std::vector<bool> labels{true, false, true, true, false, true};
  const double hand = (12 * 1.0 + 25 * 0.75 + 13 * (2.0 / 3.0)) / 50;
  CHECK(std::abs(average_precision(ranked(labels), 4, grid).ap - hand) < 1e-10);
  CHECK(std::abs(ap_oracle(labels, 4) - hand) < 1e-10);
  // Input order does not matter, scores do.
  std::vector<RankedDetection> shuffled = ranked(labels);
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(std::abs(average_precision(shuffled, 4, grid).ap - hand) < 1e-10);
}

TEST_CASE("average precision equals the definition on random lists") {
  cktest::Gen gen(64);
  const RecallGrid grid;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen.integer(0, 40);
    std::vector<bool> labels(n);
    int tps = 0;
    for (int i = 0; i < n; ++i) tps += (labels[i] = gen.coin());
    const int num_gt = tps + gen.integer(0, 5);
    if (num_gt == 0) continue;
    CHECK(std::abs(average_precision(ranked(labels), num_gt, grid).ap - ap_oracle(labels, num_gt)) < 1e-12);
  }
}

TEST_CASE("deleting a false positive never lowers AP") {
  cktest::Gen gen(65);
  const RecallGrid grid;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<bool> labels(20);
    int tps = 0;
    for (auto&& l : labels) tps += (l = gen.coin());
    std::vector<std::size_t> fps;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!labels[i]) fps.push_back(i);
    }
    if (fps.empty()) continue;
    std::vector<bool> fewer = labels;
    fewer.erase(fewer.begin() + fps[gen.integer(0, int(fps.size()) - 1)]);
    CHECK(average_precision(ranked(fewer), tps + 2, grid).ap >= average_precision(ranked(labels), tps + 2, grid).ap - 1e-15);
  }
}

TEST_CASE("heading weights and APH") {
  CHECK(heading_weight(0.0) == 1.0);
  CHECK(heading_weight(kPi / 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(heading_weight(kPi) == 0.0);
  const RecallGrid grid;
  std::vector<RankedDetection> one{{0.9, true, heading_weight(kPi)}};
  CHECK(average_precision(one, 1, grid, true).ap == 0.0);
  std::vector<RankedDetection> exact{{0.9, true, 1.0}, {0.8, false, 1.0}};
  CHECK(average_precision(exact, 1, grid, true).ap == average_precision(exact, 1, grid).ap);

  cktest::Gen gen(66);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RankedDetection> dets;
    int tps = 0;
    for (int i = 0; i < 15; ++i) {
      const bool tp = gen.coin();
      tps += tp;
      dets.push_back({gen.uniform(0, 1), tp, heading_weight(gen.uniform(0, kPi))});
    }
    CHECK(average_precision(dets, tps + 1, grid, true).ap <= average_precision(dets, tps + 1, grid).ap + 1e-15);
  }
}

TEST_CASE("ONCE evaluation: perfect predictions, missing classes, buckets") {
  const EvalConfig cfg = EvalConfig::once();
  FrameGroundTruths gts(2);
  gts[0] = {{make(10, 0, 2, 4, 0.1, 0), {}}, {make(35, 5, 2.5, 10, 0.2, 1), {}}, {make(5, 5, 0.6, 0.7, 0, 3), {}}};
  gts[1] = {{make(-60, 2, 2, 4, -1.0, 2), {}}, {make(3, -8, 0.7, 1.8, 2.0, 4), {}}};
  FrameDetections perfect(2);
  for (int f = 0; f < 2; ++f) {
    for (const GroundTruth& g : gts[f]) perfect[f].push_back({g.box, 0.8});
  }
  const EvalReport r = evaluate_once(perfect, gts, cfg);
  REQUIRE(r.classes.size() == 3);
  for (const ClassMetrics& c : r.classes) CHECK(c.ap == doctest::Approx(1.0));
  CHECK(r.map == doctest::Approx(1.0));
  CHECK(r.classes[0].num_gt == 3);  // car, bus and truck merge
  CHECK(r.bucket_labels == std::vector<std::string>{"0m-30m", "30m-50m", "50m-inf"});
  CHECK(r.classes[0].bucket_gt == std::vector<int>{1, 1, 1});
  CHECK(r.classes[0].bucket_ap[2] == doctest::Approx(1.0));

  FrameDetections vehicles(2);
  for (int f = 0; f < 2; ++f) {
    for (const GroundTruth& g : gts[f]) {
      if (g.box.class_id <= 2) vehicles[f].push_back({g.box, 0.8});
    }
  }
  const EvalReport v = evaluate_once(vehicles, gts, cfg);
  CHECK(v.classes[1].ap == 0.0);
  CHECK(v.map == doctest::Approx((v.classes[0].ap + 0 + 0) / 3));
  CHECK(v.map == doctest::Approx(1.0 / 3));

  // An unmatched detection far away lands in its own bucket as an FP.
  FrameDetections extra = perfect;
  extra[0].push_back({make(40, 0, 2, 4, 0, 0), 0.95});
  const EvalReport e = evaluate_once(extra, gts, cfg);
  CHECK(e.classes[0].fp == 1);
  CHECK(e.classes[0].bucket_ap[0] == doctest::Approx(1.0));
  CHECK(e.classes[0].bucket_ap[1] == doctest::Approx(0.5));
}

TEST_CASE("ONCE evaluation composes from single-class evaluations") {
  cktest::Gen gen(67);
  const EvalConfig cfg = EvalConfig::once();
  FrameGroundTruths gts(6);
  FrameDetections dets(6);
  for (int f = 0; f < 6; ++f) {
    for (int g = 0; g < 6; ++g) {
      const Box3D b = make(gen.uniform(-60, 60), gen.uniform(-60, 60), 2, 4, gen.uniform(-3, 3), gen.integer(0, 4));
      gts[f].push_back({b, {}});
      if (gen.uniform(0, 1) < 0.7) {
        Box3D d = b;
        d.center.x += gen.uniform(-0.3, 0.3);
        d.yaw += gen.uniform(-0.3, 0.3) + (gen.uniform(0, 1) < 0.1 ? kPi : 0);
        dets[f].push_back({d, gen.uniform(0, 1)});
      }
    }
    dets[f].push_back({make(gen.uniform(-60, 60), gen.uniform(-60, 60), 2, 4, 0, gen.integer(0, 4)), gen.uniform(0, 1)});
  }
  const EvalReport all = evaluate_once(dets, gts, cfg);
  const EvalReport threaded = evaluate_once(dets, gts, cfg, 4);
  for (int c = 0; c < 3; ++c) {
    EvalConfig one = single_class(cfg.iou_thresholds[c]);
    FrameGroundTruths g1(6);
    FrameDetections d1(6);
    for (int f = 0; f < 6; ++f) {
      for (GroundTruth g : gts[f]) {
        if (cfg.class_merge[g.box.class_id] != c) continue;
        g.box.class_id = 0;
        g1[f].push_back(g);
      }
      for (Detection d : dets[f]) {
        if (cfg.class_merge[d.box.class_id] != c) continue;
        d.box.class_id = 0;
        d1[f].push_back(d);
      }
    }
    const EvalReport r = evaluate_once(d1, g1, one);
    CHECK(r.classes[0].ap == all.classes[c].ap);
    CHECK(r.classes[0].bucket_ap == all.classes[c].bucket_ap);
    CHECK(threaded.classes[c].ap == all.classes[c].ap);
  }
}

TEST_CASE("Waymo evaluation levels") {
  const EvalConfig cfg = EvalConfig::waymo();
  FrameGroundTruths gts(1);
  gts[0] = {{make(10, 0, 2, 4, 0, 0), 50}, {make(20, 0, 2, 4, 0, 0), 3}, {make(30, 0, 2, 4, 0, 0), 0},
            {make(0, 10, 0.6, 0.6, 0, 1), 9}};
  FrameDetections dets(1);
  dets[0] = {{gts[0][0].box, 0.9}, {gts[0][1].box, 0.8}};
  const EvalReport r = evaluate_waymo(dets, gts, cfg);
  REQUIRE(r.levels.size() == 2);
  const ClassMetrics& l1 = r.levels[0].classes[0];
  const ClassMetrics& l2 = r.levels[1].classes[0];
  CHECK(r.levels[0].name == "LEVEL_1");
  CHECK(l1.num_gt == 1);
  CHECK(l2.num_gt == 2);
  CHECK(l1.ap == doctest::Approx(1.0));
  CHECK(l1.fp == 0);  // the 3-point match is ignored at level 1, not counted
  CHECK(l2.ap == doctest::Approx(1.0));
  CHECK(l2.aph == doctest::Approx(1.0));
  CHECK(r.levels[0].classes[1].num_gt == 1);
  for (const auto& level : r.levels) {
    for (const auto& c : level.classes) CHECK(c.aph <= c.ap + 1e-15);
  }
  CHECK(r.levels[1].classes[0].num_gt >= r.levels[0].classes[0].num_gt);

  FrameGroundTruths missing = gts;
  missing[0][1].num_points.reset();
  CHECK_THROWS_AS(evaluate_waymo(dets, missing, cfg), DataError);
}

TEST_CASE("Waymo APH weights matched headings") {
  EvalConfig cfg = EvalConfig::waymo();
  cfg.iou_mode = IouMode::kBev;
  cfg.iou_thresholds = {0.1, 0.5, 0.5};
  FrameGroundTruths gts(1);
  gts[0] = {{make(10, 0, 3, 3, 0, 0), 50}};
  FrameDetections dets(1);
  dets[0] = {{make(10, 0, 3, 3, kPi / 2, 0), 0.9}};  // square, so a quarter turn keeps IoU 1
  const EvalReport r = evaluate_waymo(dets, gts, cfg);
  CHECK(r.levels[0].classes[0].ap == doctest::Approx(1.0));
  // The weight scales the TP count in both precision and recall: 0.5 recall
  // reached at 0.5 precision covers 25 of the 50 recall points.
  CHECK(r.levels[0].classes[0].aph == doctest::Approx(0.25));
}

TEST_CASE("EvalConfig validation and bucket labels") {
  EvalConfig c = EvalConfig::once();
  CHECK_NOTHROW(validate(c));
  c.iou_thresholds[0] = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = EvalConfig::once();
  c.class_merge[0] = 7;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = EvalConfig::once();
  c.distance_edges = {0, 50, 30};
  CHECK_THROWS_AS(validate(c), ConfigError);
  CHECK(bucket_label(0, 30) == "0m-30m");
  CHECK(bucket_label(50, std::numeric_limits<double>::infinity()) == "50m-inf");
  CHECK_THROWS_AS(evaluate_once(FrameDetections(1), FrameGroundTruths(2), EvalConfig::once()), DataError);
}
