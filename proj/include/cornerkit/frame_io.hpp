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
/// \file
/// \brief Point cloud, annotation and detection files.
///
/// Clouds are headerless little-endian f32 records of 3 + attr_dim values.
/// Annotations and detections are JSON lines, one object per box:
///   {"frame_id", "class", "cx", "cy", "cz", "w", "l", "h", "yaw",
///    "score"?, "num_points"?}
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cornerkit/augmentation.hpp"
#include "cornerkit/detection.hpp"
#include "cornerkit/frame.hpp"

namespace cornerkit {

PointCloud decode_cloud(std::span<const std::byte> bytes, int attr_dim);
std::vector<std::byte> encode_cloud(const PointCloud& cloud);
PointCloud read_cloud(const std::filesystem::path& path, int attr_dim);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);

/// One parsed JSON line.
struct BoxRecord {
  std::string frame_id;
  Box3D box;
  std::optional<double> score;
  std::optional<int> num_points;

  friend bool operator==(const BoxRecord&, const BoxRecord&) = default;
};

/// Unknown class names raise DataError naming the byte offset of the line;
/// malformed JSON or missing fields raise FormatError(kSyntax).
std::vector<BoxRecord> parse_records(const std::string& text,
                                     const std::vector<std::string>& classes);
std::string format_records(const std::vector<BoxRecord>& records,
                           const std::vector<std::string>& classes);
std::vector<BoxRecord> read_records(const std::filesystem::path& path,
                                    const std::vector<std::string>& classes);
void write_records(const std::filesystem::path& path, const std::vector<BoxRecord>& records,
                   const std::vector<std::string>& classes);

/// Records grouped by frame id in order of first appearance.
struct FrameGroups {
  std::vector<std::string> frame_ids;
  std::vector<std::vector<BoxRecord>> records;

  int index_of(const std::string& frame_id) const;  // -1 if absent
};
FrameGroups group_by_frame(const std::vector<BoxRecord>& records);

std::vector<BoxRecord> detection_records(const std::string& frame_id,
                                         std::span<const Detection> dets);
std::vector<Detection> to_detections(std::span<const BoxRecord> records);
std::vector<GroundTruth> to_ground_truths(std::span<const BoxRecord> records);

/// Cloud plus the annotation lines tagged with frame_id. The point counts
/// are filled only if every line carries num_points.
Frame read_frame(const std::filesystem::path& cloud_path,
                 const std::filesystem::path& annotation_path, const std::string& frame_id,
                 const std::vector<std::string>& classes, int attr_dim);
void write_frame(const std::filesystem::path& cloud_path,
                 const std::filesystem::path& annotation_path, const Frame& frame,
                 const std::vector<std::string>& classes);
std::vector<BoxRecord> frame_records(const Frame& frame);

/// A manifest.json plus one TNS1 file of local points per entry.
void save_gt_database(const std::filesystem::path& dir, const GtDatabase& db,
                      const std::vector<std::string>& classes);
GtDatabase load_gt_database(const std::filesystem::path& dir,
                            const std::vector<std::string>& classes);

}  // namespace cornerkit
