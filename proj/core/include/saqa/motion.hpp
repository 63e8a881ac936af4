#pragma once

#include <string>
#include <utility>
#include <vector>

#include "saqa/tracks.hpp"

namespace saqa {

// Five directional regions over the stereo field. The operative convention
// (positive azimuth = left) follows the benchmark's bucket table; the prose
// convention (positive = right) is available behind SignConvention.
enum class DoABucket { FrontLeft, SlightlyLeft, Front, SlightlyRight, FrontRight };

enum class SignConvention { PositiveLeft, PositiveRight };

std::string bucket_name(DoABucket bucket);

// Total on [-90, 90]; boundaries at +/-15 and +/-45 go to the more frontal
// bucket. Out-of-range azimuth is a validation error.
DoABucket bucket_of(double azimuth_deg,
                    SignConvention convention = SignConvention::PositiveLeft);

// Minimum per-frame change that counts as real motion.
struct Tolerances {
  double doa_deg = 5.0;
  double dist_m = 0.005;
};

// Consecutive-frame deltas with |delta| >= tol, as (index of later frame,
// delta) pairs in order.
std::vector<std::pair<std::size_t, double>> significant_deltas(
    const std::vector<double>& series, double tol);

struct MotionSummary {
  DoABucket start_bucket, end_bucket;
  double net_doa_change_deg = 0.0;
  double total_doa_change_deg = 0.0;
  double net_dist_change_m = 0.0;
  double total_dist_change_m = 0.0;
  double min_dist_m = 0.0;
  double max_dist_m = 0.0;
  double doa_range_fraction = 0.0;   // total / 180
  double dist_range_fraction = 0.0;  // total / 6
};

// Net change is last - first. Total change is the tolerance-hysteresis total
// variation: walking the series, a delta is committed whenever the value has
// moved >= tol away from the last committed anchor, which makes the total
// immune to sub-threshold jitter frames; it is clamped below by |net| so
// total >= |net| always holds.
MotionSummary summarize_motion(const EventTrack& track, const Tolerances& tol,
                               SignConvention convention = SignConvention::PositiveLeft);

std::string motion_summary_json(const MotionSummary& summary);

enum class DistanceTrend { Closer, Farther, AboutSame };

std::string distance_trend_name(DistanceTrend trend);

// AboutSame iff |net distance change| < tol.dist_m, else the sign decides.
DistanceTrend distance_dynamics(const EventTrack& track, const Tolerances& tol);

// True iff the track starts in from_region, ends in to_region and its total
// DoA change is at least tol.doa_deg (the move must be noticeable).
bool trajectory_matches(const EventTrack& track, const Tolerances& tol,
                        const std::vector<DoABucket>& from_region,
                        const std::vector<DoABucket>& to_region,
                        SignConvention convention = SignConvention::PositiveLeft);

enum class CompareAspect { ClosestApproach, LargestDirectionShift, LargestDistanceChange };

// Total-variation semantics by default; NetChange switches the comparison
// quantities for the two "largest change" aspects to |net change|.
enum class ChangeMode { SignificantVariation, NetChange };

struct CrossSourceResult {
  std::string winner;
  std::vector<std::pair<std::string, double>> per_track;  // (label, value) in track order
};

// ClosestApproach: minimum over min_dist_m. LargestDirectionShift /
// LargestDistanceChange: maximum total change. Ties break to the earlier
// first frame, then the lexicographically smaller label. Fewer than two
// tracks is a validation error.
CrossSourceResult cross_source_compare(const SceneMetadata& scene, CompareAspect aspect,
                                       const Tolerances& tol,
                                       SignConvention convention = SignConvention::PositiveLeft,
                                       ChangeMode mode = ChangeMode::SignificantVariation);

enum class DominantAspect { DirectionMore, DistanceMore, Comparable };

std::string dominant_aspect_name(DominantAspect aspect);

// Compares range fractions (total DoA change / 180 vs total distance change
// / 6); Comparable iff the fractions differ by at most margin.
DominantAspect dominant_change(const EventTrack& track, const Tolerances& tol,
                               double margin = 0.05,
                               SignConvention convention = SignConvention::PositiveLeft,
                               ChangeMode mode = ChangeMode::SignificantVariation);

}  // namespace saqa
