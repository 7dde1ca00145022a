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
// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cornerkit/augmentation.hpp"
#include "cornerkit/corner_assigner.hpp"
#include "cornerkit/decoder.hpp"
#include "cornerkit/losses.hpp"
#include "cornerkit/metrics.hpp"
#include "cornerkit/scene_synth.hpp"
#include "cornerkit/target_builder.hpp"
#include "cornerkit/voxelizer.hpp"
#include "support.hpp"

using namespace cornerkit;

namespace {

constexpr double kPi = std::numbers::pi;

// Tolerances and budgets.
constexpr int kParityInstances = 1000;
constexpr double kParitySeconds = 1.0;
constexpr double kCornerTol = 1e-12;
constexpr int kIouPairs = 200;
constexpr int kIouSamplesPerAxis = 1000;  // 10^6 stratified samples
constexpr double kIouMcTol = 2e-3;
constexpr double kIouSymTol = 1e-12;
constexpr double kIouSeconds = 30.0;
constexpr int kGradGrids = 20;
constexpr double kGradStep = 1e-4;
constexpr double kGradRelTol = 1e-5;
constexpr int kRoundTripBoxes = 500;
constexpr double kCenterTol = 1e-4;
constexpr double kDimsRelTol = 1e-5;
constexpr double kYawTol = 1e-6;
constexpr double kGaussTol = 1e-12;
constexpr double kApTol = 1e-10;
constexpr int kAugmentSeeds = 100;
constexpr double kVoxelizeMs = 50.0;
constexpr double kTargetsMs = 20.0;

struct Suite {
  int failed = 0;
  void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    failed += !ok;
  }
};

template <typename... Ts>
std::string cat(const Ts&... parts) {
  std::ostringstream os;
  os.precision(4);
  (os << ... << parts);
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Corner selection, rewritten as a separate straight-line code path.

struct Transcribed {
  int max_i = 0;
  std::array<int, 3> idx{};
  std::array<Point2, 3> corners{};  // C_f, C_l, C_w
};

Transcribed transcribe_selection(const Box3D& box, const std::vector<Vec3>& points) {
  static const int index[4][3] = {{2, 3, 1}, {3, 2, 0}, {0, 1, 3}, {1, 0, 2}};
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  // Top-surface corners in quadrant order.
  const double sx[4] = {-1, 1, 1, -1}, sy[4] = {1, 1, -1, -1};
  Point2 C[4];
  for (int k = 0; k < 4; ++k) {
    const double lx = sx[k] * box.dims.w / 2, ly = sy[k] * box.dims.l / 2;
    C[k] = {box.center.x + lx * c - ly * s, box.center.y + lx * s + ly * c};
  }
  std::vector<double> X, Y;
  for (const Vec3& p : points) {
    const double dx = p.x - box.center.x, dy = p.y - box.center.y, dz = p.z - box.center.z;
    // Row vector times the rotation matrix.
    const double xl = dx * c + dy * s;
    const double yl = -dx * s + dy * c;
    if (std::abs(xl) <= box.dims.w / 2 && std::abs(yl) <= box.dims.l / 2 && std::abs(dz) <= box.dims.h / 2) {
      X.push_back(xl);
      Y.push_back(yl);
    }
  }
  int q0 = 0, q1 = 0, q2 = 0, q3 = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    q0 += X[i] < 0 && Y[i] > 0;
    q1 += X[i] > 0 && Y[i] > 0;
    q2 += X[i] > 0 && Y[i] < 0;
    q3 += X[i] < 0 && Y[i] < 0;
  }
  const int q[4] = {q0, q1, q2, q3};
  const int sub_q[4] = {q0 + q1 + q3, q1 + q0 + q2, q2 + q1 + q3, q3 + q2 + q0};
  const int valid_q = (q0 > 0) + (q1 > 0) + (q2 > 0) + (q3 > 0);
  auto argmax = [](const int* v) {
    int best = 0;
    for (int k = 1; k < 4; ++k) {
      if (v[k] > v[best]) best = k;
    }
    return best;
  };
  Transcribed t;
  t.max_i = valid_q <= 2 ? argmax(q) : argmax(sub_q);
  for (int j = 0; j < 3; ++j) {
    t.idx[j] = index[t.max_i][j];
    t.corners[j] = C[t.idx[j]];
  }
  return t;
}

void check_parity(Suite& suite) {
  cktest::Gen gen(1001);
  struct Instance {
    Box3D box;
    PointCloud cloud;
  };
  std::vector<Instance> cases;
  for (int n = 0; n < kParityInstances; ++n) {
    Instance in{gen.box(60.0), PointCloud(0)};
    const Box3D& b = in.box;
    const double c = std::cos(b.yaw), s = std::sin(b.yaw);
    // Restrict to a random subset of quadrants so every valid_q occurs.
    const int allowed = gen.integer(0, 15);
    const int count = gen.integer(0, 30);
    for (int i = 0; i < count; ++i) {
      const int k = gen.integer(0, 3);
      if (!(allowed >> k & 1)) continue;
      const double lx = (k == 1 || k == 2 ? 1 : -1) * gen.uniform(0.01, 0.49) * b.dims.w;
      const double ly = (k <= 1 ? 1 : -1) * gen.uniform(0.01, 0.49) * b.dims.l;
      const double lz = gen.uniform(-0.49, 0.49) * b.dims.h;
      in.cloud.push_back({b.center.x + lx * c - ly * s, b.center.y + lx * s + ly * c, b.center.z + lz});
    }
    for (int i = gen.integer(0, 10); i > 0; --i) {
      const double lx = gen.uniform(0.55, 2.0) * b.dims.w * (gen.coin() ? 1 : -1);
      const double ly = gen.uniform(-1.0, 1.0) * b.dims.l;
      in.cloud.push_back({b.center.x + lx * c - ly * s, b.center.y + lx * s + ly * c, b.center.z});
    }
    cases.push_back(std::move(in));
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CornerSelection> got;
  got.reserve(cases.size());
  for (const Instance& in : cases) got.push_back(select_corners(in.box, in.cloud));
  const double elapsed = seconds_since(t0);

  int agree = 0;
  for (std::size_t n = 0; n < cases.size(); ++n) {
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < cases[n].cloud.size(); ++i) pts.push_back(cases[n].cloud.position(i));
    const Transcribed want = transcribe_selection(cases[n].box, pts);
    const CornerSelection& s = got[n];
    bool ok = s.max_quadrant == want.max_i &&
              s.corner_index(CornerType::kInvisible) == want.idx[0] &&
              s.corner_index(CornerType::kPartlyVisibleLength) == want.idx[1] &&
              s.corner_index(CornerType::kPartlyVisibleWidth) == want.idx[2];
    const Point2* lib[3] = {&s.ivc, &s.pvcl, &s.pvcw};
    for (int j = 0; j < 3; ++j) {
      ok = ok && std::abs(lib[j]->x - want.corners[j].x) <= kCornerTol &&
           std::abs(lib[j]->y - want.corners[j].y) <= kCornerTol;
    }
    agree += ok;
  }
  suite.report("corner-selection-parity", agree == kParityInstances && elapsed < kParitySeconds,
               cat(agree, "/", kParityInstances, " agree, ", elapsed * 1e3, " ms"));
}

void check_index_table(Suite& suite) {
  Box3D b;
  b.dims = {2, 4, 2};
  struct Case {
    std::array<int, 4> q;
    std::array<int, 3> want;
  };
  const Case cases[] = {{{5, 0, 0, 0}, {2, 3, 1}}, {{4, 3, 2, 1}, {3, 2, 0}}, {{3, 3, 0, 0}, {2, 3, 1}}};
  int ok = 0;
  std::string detail;
  for (const Case& c : cases) {
    const CornerSelection s = select_corners(b, QuadrantHistogram{c.q}, c.q[0] + c.q[1] + c.q[2] + c.q[3]);
    const std::array<int, 3> got{s.corner_index(CornerType::kInvisible),
                                 s.corner_index(CornerType::kPartlyVisibleLength),
                                 s.corner_index(CornerType::kPartlyVisibleWidth)};
    ok += got == c.want;
    detail += cat("(", got[0], ",", got[1], ",", got[2], ") ");
  }
  suite.report("corner-index-table", ok == 3, detail + cat(ok, "/3 exact"));
}

// ---------------------------------------------------------------------------
// Rotated IoU against a stratified Monte Carlo estimate.

double mc_iou(const Box3D& a, const Box3D& b, cktest::Gen& gen) {
  // Jittered lattice over a's footprint; the fraction inside b estimates the
  // intersection area.
  const double c = std::cos(a.yaw), s = std::sin(a.yaw);
  Box3D flat_b = b;
  flat_b.center.z = 0;
  flat_b.dims.h = 1;
  long inside = 0;
  const int n = kIouSamplesPerAxis;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double lx = ((i + gen.uniform(0, 1)) / n - 0.5) * a.dims.w;
      const double ly = ((j + gen.uniform(0, 1)) / n - 0.5) * a.dims.l;
      const Vec3 p{a.center.x + lx * c - ly * s, a.center.y + lx * s + ly * c, 0};
      inside += cktest::inside_oracle(p, flat_b, 0.0);
    }
  }
  const double area_a = a.dims.w * a.dims.l, area_b = b.dims.w * b.dims.l;
  const double inter = area_a * double(inside) / (double(n) * n);
  return inter / (area_a + area_b - inter);
}

void check_iou(Suite& suite) {
  cktest::Gen gen(1002);
  const auto t0 = std::chrono::steady_clock::now();
  double worst_mc = 0, worst_sym = 0;
  bool identity = true;
  for (int k = 0; k < kIouPairs; ++k) {
    Box3D a = gen.box(10.0);
    Box3D b = gen.box(10.0);
    b.center.x = a.center.x + gen.uniform(-3, 3);
    b.center.y = a.center.y + gen.uniform(-3, 3);
    const double analytic = iou_bev(a, b);
    worst_mc = std::max(worst_mc, std::abs(analytic - mc_iou(a, b, gen)));
    worst_sym = std::max({worst_sym, std::abs(analytic - iou_bev(b, a)), std::abs(iou_3d(a, b) - iou_3d(b, a))});
    identity = identity && iou_bev(a, a) == 1.0 && iou_3d(a, a) == 1.0;
  }
  const double elapsed = seconds_since(t0);
  suite.report("rotated-iou",
               worst_mc < kIouMcTol && worst_sym < kIouSymTol && identity && elapsed < kIouSeconds,
               cat("max |analytic-MC| ", worst_mc, ", max asymmetry ", worst_sym, ", identity ",
                   identity ? "exact" : "inexact", ", ", elapsed, " s"));
}

// ---------------------------------------------------------------------------
// Loss gradients against central differences.

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12}); }

void check_gradients(Suite& suite) {
  cktest::Gen gen(1003);
  const LossWeights w;  // alpha 2, beta 4
  double worst_focal = 0, worst_l1 = 0;
  for (int g = 0; g < kGradGrids; ++g) {
    Grid pred(32, 32, 5), target(32, 32, 5);
    int positives = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pred.values()[i] = gen.uniform(0.05, 0.95);
      const double u = gen.uniform(0, 1);
      target.values()[i] = u < 0.03 ? 1.0 : (u < 0.5 ? 0.0 : gen.uniform(0.0, 0.99));
      positives += target.values()[i] == 1.0;
    }
    const LossValue focal = focal_loss(pred, target, w);
    // The loss is a sum of per-pixel terms over a target-only normalizer, so
    // each partial derivative is a one-pixel difference quotient.
    const double norm = std::max(positives, 1);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const Grid y(1, 1, 1, target.values()[i]);
      const double up = focal_loss(Grid(1, 1, 1, pred.values()[i] + kGradStep), y, w).value;
      const double down = focal_loss(Grid(1, 1, 1, pred.values()[i] - kGradStep), y, w).value;
      const double fd = (up - down) / (2 * kGradStep) / norm;
      worst_focal = std::max(worst_focal, rel_err(focal.gradient.values()[i], fd));
    }

    Grid p(32, 32, 5), t(32, 32, 5);
    MaskGrid m(32, 32, 1);
    for (std::size_t i = 0; i < p.size(); ++i) {
      t.values()[i] = gen.uniform(-2, 2);
      p.values()[i] = t.values()[i] + gen.uniform(0.01, 1.0) * (gen.coin() ? 1 : -1);
    }
    for (auto& v : m.values()) v = gen.coin();
    const LossValue l1 = l1_loss(p, t, m);
    for (std::size_t i = 0; i < p.size(); ++i) {
      Grid up = p, down = p;
      up.values()[i] += kGradStep;
      down.values()[i] -= kGradStep;
      const double fd = (l1_loss(up, t, m).value - l1_loss(down, t, m).value) / (2 * kGradStep);
      worst_l1 = std::max(worst_l1, rel_err(l1.gradient.values()[i], fd));
    }
  }
  const double composed = total_loss({1, 1, 1, 1}, w).total;
  suite.report("loss-gradients",
               worst_focal < kGradRelTol && worst_l1 < kGradRelTol && std::abs(composed - 1.75) < 1e-15,
               cat("focal max rel ", worst_focal, ", L1 max rel ", worst_l1, ", unit composition ", composed));
}

// ---------------------------------------------------------------------------
// Targets decode back to their boxes.

void check_round_trip(Suite& suite) {
  cktest::Gen gen(1004);
  const GridSpec spec;
  TargetConfig cfg;
  cfg.num_corners = 4;
  std::vector<Box3D> boxes;
  std::vector<std::pair<int, int>> cells;
  while (static_cast<int>(boxes.size()) < kRoundTripBoxes) {
    const Box3D b = gen.box(74.5);
    const auto cell = locate_keypoint({b.center.x, b.center.y}, spec);
    if (!cell) continue;
    bool apart = true;
    for (const auto& [r, c] : cells) apart = apart && std::max(std::abs(r - cell->row), std::abs(c - cell->col)) >= 2;
    if (!apart) continue;
    boxes.push_back(b);
    cells.emplace_back(cell->row, cell->col);
  }
  PointCloud cloud(1);
  for (const Box3D& b : boxes) {
    const PointCloud near = gen.points_near(b, 12);
    for (std::size_t i = 0; i < near.size(); ++i) cloud.append(near.record(i));
  }
  const TargetBundle t = build_targets(boxes, cloud, spec, cfg);

  // Decode at every positive center pixel.
  std::vector<Peak> peaks;
  const MaskGrid& mask = t.centers.mask;
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (!mask.at(r, c, 0)) continue;
      int ch = 0;
      for (int k = 1; k < t.centers.heatmap.channels(); ++k) {
        if (t.centers.heatmap.at(r, c, k) > t.centers.heatmap.at(r, c, ch)) ch = k;
      }
      peaks.push_back({r, c, ch, t.centers.heatmap.at(r, c, ch)});
    }
  }
  const DecodeResult d = decode_boxes(peaks, t.centers.regression, spec);
  double worst_c = 0, worst_d = 0, worst_y = 0;
  int matched = 0;
  for (std::size_t k = 0; k < peaks.size() && k < d.detections.size(); ++k) {
    const auto it = std::find(cells.begin(), cells.end(), std::make_pair(peaks[k].row, peaks[k].col));
    if (it == cells.end()) continue;
    const Box3D& want = boxes[it - cells.begin()];
    const Box3D& got = d.detections[k].box;
    if (got.class_id != want.class_id) continue;
    ++matched;
    worst_c = std::max({worst_c, std::abs(got.center.x - want.center.x), std::abs(got.center.y - want.center.y),
                        std::abs(got.center.z - want.center.z)});
    worst_d = std::max({worst_d, std::abs(got.dims.w / want.dims.w - 1), std::abs(got.dims.l / want.dims.l - 1),
                        std::abs(got.dims.h / want.dims.h - 1)});
    worst_y = std::max(worst_y, heading_difference(got.yaw, want.yaw));
  }

  // Every stored corner and center offset lies inside its cell.
  bool offsets_ok = true;
  int corner_positives = 0;
  const CornerTargets& ct = t.corners;
  for (int r = 0; r < ct.mask.rows(); ++r) {
    for (int c = 0; c < ct.mask.cols(); ++c) {
      for (int k = 0; k < ct.mask.channels(); ++k) {
        if (!ct.mask.at(r, c, k)) continue;
        ++corner_positives;
        const double ox = ct.offsets.at(r, c, 2 * k), oy = ct.offsets.at(r, c, 2 * k + 1);
        offsets_ok = offsets_ok && ox >= 0 && ox < spec.cell_x() && oy >= 0 && oy < spec.cell_y();
      }
      if (mask.at(r, c, 0)) {
        const double ox = t.centers.regression.at(r, c, 0), oy = t.centers.regression.at(r, c, 1);
        offsets_ok = offsets_ok && ox >= 0 && ox < spec.cell_x() && oy >= 0 && oy < spec.cell_y();
      }
    }
  }
  const bool ok = matched == kRoundTripBoxes && worst_c < kCenterTol && worst_d < kDimsRelTol &&
                  worst_y < kYawTol && offsets_ok && corner_positives > 0;
  suite.report("target-decode-round-trip", ok,
               cat(matched, "/", kRoundTripBoxes, " recovered, center err ", worst_c, " m, dims rel ", worst_d,
                   ", yaw ", worst_y, " rad, ", corner_positives, " corner offsets ",
                   offsets_ok ? "in [0, cell)" : "OUT OF CELL"));
}

void check_gaussian(Suite& suite) {
  const double e0 = std::abs(gaussian_value(0, 0, 2) - 1.0);
  const double e1 = std::abs(gaussian_value(2, 0, 2) - std::exp(-4.5));
  const double e2 = std::abs(gaussian_value(1, 1, 2) - std::exp(-2.25));
  suite.report("gaussian-values", std::max({e0, e1, e2}) < kGaussTol,
               cat("errors ", e0, ", ", e1, ", ", e2));
}

// ---------------------------------------------------------------------------
// Evaluation protocol.

void check_evaluation(Suite& suite) {
  std::vector<std::string> fails;

  // Perfect predictions on the street fixture, both as copied ground truth and
  // through targets and decoding.
  const Fixture street = make_fixture("street");
  FrameGroundTruths gts{{}};
  FrameDetections copied{{}};
  for (std::size_t i = 0; i < street.frame.boxes.size(); ++i) {
    gts[0].push_back({street.frame.boxes[i], street.frame.point_counts[i]});
    copied[0].push_back({street.frame.boxes[i], 0.9});
  }
  const GridSpec spec;
  const TargetBundle t = build_targets(street.frame.boxes, street.frame.cloud, spec, TargetConfig{});
  const auto peaks = extract_peaks(t.centers.heatmap, 0, 0.5);
  FrameDetections decoded{decode_boxes(peaks, t.centers.regression, spec).detections};
  for (const auto* dets : {&copied, &decoded}) {
    const EvalReport r = evaluate(*dets, gts, EvalConfig::once());
    bool all_one = std::abs(r.map - 1.0) < 1e-12;
    for (const ClassMetrics& c : r.classes) all_one = all_one && std::abs(c.ap - 1.0) < 1e-12;
    if (!all_one) fails.push_back(cat(dets == &copied ? "copied" : "decoded", " mAP ", r.map));
  }

  // Heading flipped by pi: full overlap, rejected by the gate.
  FrameDetections flipped = copied;
  for (Detection& d : flipped[0]) d.box.yaw = normalize_angle(d.box.yaw + kPi);
  const EvalReport fr = evaluate(flipped, gts, EvalConfig::once());
  int tps = 0;
  for (const ClassMetrics& c : fr.classes) tps += c.tp;
  if (tps != 0 || fr.map != 0.0) fails.push_back(cat("flipped: ", tps, " TPs"));

  // Six detections against four ground truths.
  std::vector<RankedDetection> six;
  const bool labels[] = {true, false, true, true, false, true};
  for (int i = 0; i < 6; ++i) six.push_back({1.0 - 0.1 * i, labels[i], 1.0});
  const double hand = (12 * 1.0 + 25 * 0.75 + 13 * (2.0 / 3.0)) / 50.0;
  const double ap = average_precision(six, 4, RecallGrid{}).ap;
  if (std::abs(ap - hand) >= kApTol) fails.push_back(cat("hand AP ", ap, " vs ", hand));

  // A square rotated by a quarter turn: IoU 1, heading error pi/2, weight 0.5.
  EvalConfig single;
  single.class_names = {"A"};
  single.iou_thresholds = {0.7};
  Box3D sq;
  sq.center = {10, 0, 0};
  sq.dims = {2, 2, 1.5};
  Box3D turned = sq;
  turned.yaw = kPi / 2;
  const std::vector<GroundTruth> one_gt{{sq, 10}};
  const FrameMatch m = match_detections(std::vector<Detection>{{turned, 0.9}}, one_gt, single);
  const double wgt = heading_weight(m.detections[0].heading_error);
  if (m.detections[0].label != MatchLabel::kTruePositive || std::abs(wgt - 0.5) > 1e-15) {
    fails.push_back(cat("quarter-turn weight ", wgt));
  }

  // APH never exceeds AP.
  cktest::Gen gen(1005);
  int violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    FrameGroundTruths rg(3);
    FrameDetections rd(3);
    for (int f = 0; f < 3; ++f) {
      for (int k = 0; k < 8; ++k) {
        const Box3D b = gen.box(40.0, 5);
        rg[f].push_back({b, gen.integer(0, 50)});
        if (gen.coin()) {
          Box3D d = b;
          d.center.x += gen.uniform(-0.3, 0.3);
          d.yaw = normalize_angle(d.yaw + gen.uniform(-2.5, 2.5));
          rd[f].push_back({d, gen.uniform(0, 1)});
        }
        if (gen.coin()) rd[f].push_back({gen.box(40.0, 5), gen.uniform(0, 1)});
      }
    }
    for (const EvalConfig& cfg : {EvalConfig::once(), EvalConfig::waymo()}) {
      FrameGroundTruths g = rg;
      FrameDetections d = rd;
      if (cfg.difficulty == DifficultyMode::kWaymoLevels) {
        // Waymo classes: map the five raw ids onto three.
        for (auto& fr_gts : g)
          for (auto& x : fr_gts) x.box.class_id = std::min(x.box.class_id, 2);
        for (auto& fr_dets : d)
          for (auto& x : fr_dets) x.box.class_id = std::min(x.box.class_id, 2);
      }
      const EvalReport r = evaluate(d, g, cfg);
      for (const ClassMetrics& c : r.classes) violations += c.aph > c.ap + 1e-15;
      for (const LevelMetrics& l : r.levels)
        for (const ClassMetrics& c : l.classes) violations += c.aph > c.ap + 1e-15;
    }
  }
  if (violations) fails.push_back(cat(violations, " APH > AP"));

  std::string detail = cat("perfect mAP 1, flipped heading FP, hand AP ", ap, ", quarter-turn weight ", wgt,
                           ", APH <= AP on 100 suites");
  if (!fails.empty()) {
    detail.clear();
    for (const std::string& f : fails) detail += f + "; ";
  }
  suite.report("evaluation-protocol", fails.empty(), detail);
}

void check_channels(Suite& suite) {
  const int n = fused_channel_count(512, 5, 3);
  suite.report("channel-arithmetic", n == 533, cat("fused_channel_count(512, 5, 3) = ", n));
}

// ---------------------------------------------------------------------------
// Augmentation invariants.

Frame random_frame(cktest::Gen& gen, const std::string& id, int boxes) {
  Frame f;
  f.id = id;
  f.cloud = PointCloud(1);
  while (static_cast<int>(f.boxes.size()) < boxes) {
    const Box3D b = gen.box(40.0);
    bool clear = true;
    for (const Box3D& o : f.boxes) clear = clear && iou_bev(o, b) == 0.0;
    if (!clear) continue;
    f.boxes.push_back(b);
    const PointCloud near = gen.points_near(b, gen.integer(1, 40));
    for (std::size_t i = 0; i < near.size(); ++i) f.cloud.append(near.record(i));
  }
  return f;
}

void check_augmentation(Suite& suite) {
  cktest::Gen gen(1006);
  std::vector<Frame> pool;
  for (int i = 0; i < 6; ++i) pool.push_back(random_frame(gen, "pool" + std::to_string(i), 15));
  const GtDatabase db = build_gt_database(pool, 5);

  int membership_breaks = 0, nondeterministic = 0, over_limit = 0, overlaps = 0, outside = 0;
  for (int seed = 0; seed < kAugmentSeeds; ++seed) {
    const Frame f = random_frame(gen, "frame", 6);
    const PasteResult pasted = sample_and_paste(f, db, kDefaultSampleCounts, seed);
    nondeterministic += !(sample_and_paste(f, db, kDefaultSampleCounts, seed).frame == pasted.frame);
    for (std::size_t c = 0; c < kDefaultSampleCounts.size(); ++c) {
      over_limit += pasted.pasted_per_class[c] > kDefaultSampleCounts[c];
    }
    const auto& boxes = pasted.frame.boxes;
    for (std::size_t i = f.boxes.size(); i < boxes.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) overlaps += iou_bev(boxes[i], boxes[j]) > 0.0;
    }
    // Pasted points land inside their pasted boxes.
    for (std::size_t i = f.cloud.size(); i < pasted.frame.cloud.size(); ++i) {
      bool in_any = false;
      for (std::size_t b = f.boxes.size(); b < boxes.size() && !in_any; ++b) {
        in_any = cktest::inside_oracle(pasted.frame.cloud.position(i), boxes[b], 1e-9);
      }
      outside += !in_any;
    }

    const Frame g = global_augment(pasted.frame, seed);
    nondeterministic += !(global_augment(pasted.frame, seed) == g);
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      membership_breaks += points_in_box(pasted.frame.cloud, boxes[b]) != points_in_box(g.cloud, g.boxes[b]);
    }
  }
  const bool ok = !membership_breaks && !nondeterministic && !over_limit && !overlaps && !outside;
  suite.report("augmentation-invariants", ok,
               cat(kAugmentSeeds, " seeds: ", membership_breaks, " membership changes, ", nondeterministic,
                   " nondeterministic, ", over_limit, " over (1,4,3,2,2), ", overlaps, " overlapping pastes, ",
                   outside, " stray pasted points"));
}

// ---------------------------------------------------------------------------
// Throughput, best of several single-threaded runs.

double best_ms(int runs, const std::function<void()>& fn) {
  double best = 1e300;
  for (int i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, seconds_since(t0) * 1e3);
  }
  return best;
}

void check_throughput(Suite& suite) {
  cktest::Gen gen(1007);
  const GridSpec spec;
  PointCloud cloud(1);
  cloud.reserve(100000);
  for (int i = 0; i < 100000; ++i) {
    const double a[] = {gen.uniform(0, 1)};
    cloud.push_back({gen.uniform(-75.2, 75.2), gen.uniform(-75.2, 75.2), gen.uniform(-5, 3)}, a);
  }
  std::size_t voxels = 0;
  const double vox_ms = best_ms(5, [&] { voxels = voxelize(cloud, spec, 1).size(); });

  std::vector<Box3D> boxes;
  for (int i = 0; i < 50; ++i) boxes.push_back(gen.box(70.0));
  PointCloud frame = cloud;
  for (const Box3D& b : boxes) {
    const PointCloud near = gen.points_near(b, 200);
    for (std::size_t i = 0; i < near.size(); ++i) frame.append(near.record(i));
  }
  const double tgt_ms = best_ms(5, [&] { build_targets(boxes, frame, spec, TargetConfig{}); });
  suite.report("throughput", vox_ms < kVoxelizeMs && tgt_ms < kTargetsMs,
               cat("voxelize 100k points ", vox_ms, " ms (", voxels, " voxels, budget ", kVoxelizeMs,
                   "), build_targets 50 boxes ", tgt_ms, " ms (budget ", kTargetsMs, ")"));
}

}  // namespace

int main() {
  Suite suite;
  check_parity(suite);
  check_index_table(suite);
  check_iou(suite);
  check_gradients(suite);
  check_round_trip(suite);
  check_gaussian(suite);
  check_evaluation(suite);
  check_channels(suite);
  check_augmentation(suite);
  check_throughput(suite);
  std::printf("%d criteria failed\n", suite.failed);
  return suite.failed;
}
