#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "saqa/common.hpp"
#include "saqa/tracks.hpp"

namespace saqa {

// One active (frame, class, track) cell at 100 ms resolution.
struct FrameLabel {
  std::size_t frame = 0;
  std::size_t class_id = 0;
  std::size_t track_id = 0;
  double azimuth_deg = 0.0;  // [-90, 90]
  double distance_m = 0.0;   // [0, 6]
};

// T x K x C x 3 activity-coupled targets, last axis (x, y, d_norm) with
// (x, y) = (cos az, sin az) and d_norm = distance / 6. Inactive cells are
// exactly (0, 0, 0).
struct AccddoaTensor {
  Tensor4 data;
  std::size_t num_frames() const { return data.dim0(); }
  std::size_t tracks() const { return data.dim1(); }
  std::size_t classes() const { return data.dim2(); }
};

AccddoaTensor encode_targets(const std::vector<FrameLabel>& labels, std::size_t num_frames,
                             std::size_t tracks, std::size_t classes);

// Track-permutation-invariant MSE: per class, the minimum over all K!
// assignments of prediction tracks to target tracks of the mean squared
// error, averaged over classes. K <= 4. distance_mse_weight > 0 adds a
// separately weighted distance MSE masked to active target cells, computed
// under the same per-class assignment.
double pit_loss(const AccddoaTensor& pred, const AccddoaTensor& target,
                double distance_mse_weight = 0.0);

// Emits (t, k, c) cells whose (x, y) norm exceeds the threshold; azimuth is
// atan2(y, x) clamped to [-90, 90], distance is 6 * clamp(d_norm, 0, 1).
std::vector<FrameLabel> decode_predictions(const AccddoaTensor& tensor,
                                           double activity_threshold);

struct SeldOptions {
  double angle_threshold_deg = 20.0;
  double rde_threshold = 1.0;
  // When false, a matched pair is a TP on the angular criterion alone.
  bool distance_gated_fscore = true;
};

struct SeldMetrics {
  double f_score = 0.0;
  // Undefined (nullopt) when no prediction was matched to any reference.
  std::optional<double> doa_error_deg;
  std::optional<double> rel_dist_error;
  std::size_t tp = 0, fp = 0, fn = 0;
  std::size_t matched_pairs = 0;
  // References with distance 0 are excluded from the RDE mean and counted
  // here instead.
  std::size_t zero_distance_refs = 0;
};

// Frame- and class-wise matching by minimum total absolute azimuth
// difference (exact assignment, <= 4 items per side). A matched pair is a TP
// iff |dAz| <= angle_threshold_deg and, when gating is on, |d_hat - d| / d
// <= rde_threshold. DoA error and RDE average over matched pairs.
SeldMetrics seld_metrics(const std::vector<FrameLabel>& preds,
                         const std::vector<FrameLabel>& refs, const SeldOptions& options = {});

// {"f_score":..., "doa_error_deg":..., "rel_dist_error":...} with null for
// undefined errors.
std::string seld_metrics_json(const SeldMetrics& metrics);

// Two lines: header and "<F%> | <DoA deg> | <RDE>" with 1/2/3 decimals.
std::string seld_metrics_table(const SeldMetrics& metrics);

// Flattens scene tracks to frame labels (track_id = source_id).
std::vector<FrameLabel> scene_to_labels(const SceneMetadata& scene);

}  // namespace saqa
