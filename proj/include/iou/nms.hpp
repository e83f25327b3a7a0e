#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "iou/box.hpp"

namespace iou {

// A candidate box with classification confidence and predicted IoU
// confidence. gt_id identifies the ground-truth object a synthetic
// detection was generated from.
struct Detection {
  Box box;
  double cls_score = 0.0;
  double iou_score = 0.0;
  std::optional<std::size_t> gt_id;
};

// Which score ranks and suppresses during NMS.
enum class ScoreSource { Classification, PredictedIoU };

// Greedy non-maximum suppression: repeatedly keep the highest-scored
// remaining detection and drop everything with siou >= iou_thresh against
// it. Ties go to the lower original index. Output order is selection order;
// kept detections are returned unchanged. Throws EmptyInputError.
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_thresh,
                           ScoreSource source);

// Recipe for one synthetic cluster of detections around a ground-truth box.
// jitter_scale is corner noise as a fraction of sqrt(gt area); iou_score is
// the true siou against gt plus uniform noise of half-width iou_noise; the
// cls_score base is drawn independently of localization quality.
struct ClusterSpec {
  Box gt_box;
  std::size_t n_candidates = 1;
  double jitter_scale = 0.0;
  double cls_noise = 0.0;
  double iou_noise = 0.0;
  std::uint64_t seed = 0;
};

// Deterministic per (seed, cluster index); gt_id is the cluster index.
std::vector<Detection> synth_clusters(const std::vector<ClusterSpec>& specs);

struct SelectionMetrics {
  double mean_siou = 0.0;            // mean best-gt siou over kept detections
  double recall = 0.0;               // fraction of gts hit at match_thresh
  std::vector<double> per_gt_best;   // best kept siou per gt, 0 when unmatched
};

// Matches each kept detection to its best gt by siou.
// Throws EmptyInputError when either list is empty.
SelectionMetrics evaluate_selection(const std::vector<Detection>& kept,
                                    const std::vector<Box>& gts, double match_thresh);

// Cluster file: one cluster per line,
//   x1,y1,x2,y2 n_candidates jitter_scale cls_noise iou_noise seed
// '#' starts a comment. Throws ParseError; EmptyInputError when no cluster
// survives.
std::vector<ClusterSpec> parse_cluster_file(std::istream& in);
std::vector<ClusterSpec> load_cluster_file(const std::string& path);

// Detections file: CSV lines x1,y1,x2,y2,cls_score,iou_score[,gt_id].
std::vector<Detection> parse_detections_csv(std::istream& in);
std::vector<Detection> load_detections_csv(const std::string& path);
void write_detections_csv(std::ostream& out, const std::vector<Detection>& dets);

}  // namespace iou
