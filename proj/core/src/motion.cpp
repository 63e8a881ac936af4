#include "saqa/motion.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "saqa/common.hpp"

namespace saqa {
namespace {

void require_valid_track(const EventTrack& track) {
  if (track.frames.empty()) throw_validation("motion: track '" + track.label + "' is empty");
  if (track.frames.size() != track.doa_deg.size() ||
      track.frames.size() != track.dist_m.size()) {
    throw_validation("motion: track '" + track.label + "' has misaligned series");
  }
}

// Tolerance-hysteresis total variation: sum of |committed| deltas where a
// commit happens each time the series moves >= tol from the last anchor.
double hysteresis_total(const std::vector<double>& series, double tol) {
  double total = 0.0;
  double anchor = series.front();
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double delta = series[i] - anchor;
    if (std::abs(delta) >= tol) {
      total += std::abs(delta);
      anchor = series[i];
    }
  }
  return total;
}

double total_change(const std::vector<double>& series, double tol) {
  const double net = std::abs(series.back() - series.front());
  return std::max(hysteresis_total(series, tol), net);
}

}  // namespace

std::string bucket_name(DoABucket bucket) {
  switch (bucket) {
    case DoABucket::FrontLeft: return "front-left";
    case DoABucket::SlightlyLeft: return "slightly left";
    case DoABucket::Front: return "front";
    case DoABucket::SlightlyRight: return "slightly right";
    case DoABucket::FrontRight: return "front-right";
  }
  return "front";
}

DoABucket bucket_of(double azimuth_deg, SignConvention convention) {
  if (!(azimuth_deg >= -kMaxAzimuthDeg && azimuth_deg <= kMaxAzimuthDeg)) {
    throw_validation("bucket_of: azimuth " + std::to_string(azimuth_deg) +
                     " outside [-90, 90]");
  }
  // Under PositiveRight the left/right meaning of the sign flips, which is a
  // mirror of the bucket table.
  const double a = convention == SignConvention::PositiveLeft ? azimuth_deg : -azimuth_deg;
  if (a > 45.0) return DoABucket::FrontLeft;
  if (a > 15.0) return DoABucket::SlightlyLeft;
  if (a >= -15.0) return DoABucket::Front;
  if (a >= -45.0) return DoABucket::SlightlyRight;
  return DoABucket::FrontRight;
}

std::vector<std::pair<std::size_t, double>> significant_deltas(
    const std::vector<double>& series, double tol) {
  if (series.empty()) throw_validation("significant_deltas: series is empty");
  if (tol <= 0.0) throw_validation("significant_deltas: tolerance must be positive");
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double delta = series[i] - series[i - 1];
    if (std::abs(delta) >= tol) out.emplace_back(i, delta);
  }
  return out;
}

MotionSummary summarize_motion(const EventTrack& track, const Tolerances& tol,
                               SignConvention convention) {
  require_valid_track(track);
  MotionSummary s;
  s.start_bucket = bucket_of(track.doa_deg.front(), convention);
  s.end_bucket = bucket_of(track.doa_deg.back(), convention);
  s.net_doa_change_deg = track.doa_deg.back() - track.doa_deg.front();
  s.total_doa_change_deg = total_change(track.doa_deg, tol.doa_deg);
  s.net_dist_change_m = track.dist_m.back() - track.dist_m.front();
  s.total_dist_change_m = total_change(track.dist_m, tol.dist_m);
  s.min_dist_m = *std::min_element(track.dist_m.begin(), track.dist_m.end());
  s.max_dist_m = *std::max_element(track.dist_m.begin(), track.dist_m.end());
  s.doa_range_fraction = s.total_doa_change_deg / 180.0;
  s.dist_range_fraction = s.total_dist_change_m / kMaxDistanceM;
  return s;
}

std::string motion_summary_json(const MotionSummary& summary) {
  nlohmann::ordered_json j;
  j["start_bucket"] = bucket_name(summary.start_bucket);
  j["end_bucket"] = bucket_name(summary.end_bucket);
  j["net_doa_change_deg"] = summary.net_doa_change_deg;
  j["total_doa_change_deg"] = summary.total_doa_change_deg;
  j["net_dist_change_m"] = summary.net_dist_change_m;
  j["total_dist_change_m"] = summary.total_dist_change_m;
  j["min_dist_m"] = summary.min_dist_m;
  j["max_dist_m"] = summary.max_dist_m;
  j["doa_range_fraction"] = summary.doa_range_fraction;
  j["dist_range_fraction"] = summary.dist_range_fraction;
  return j.dump();
}

std::string distance_trend_name(DistanceTrend trend) {
  switch (trend) {
    case DistanceTrend::Closer: return "Closer";
    case DistanceTrend::Farther: return "Farther";
    case DistanceTrend::AboutSame: return "About the same";
  }
  return "About the same";
}

DistanceTrend distance_dynamics(const EventTrack& track, const Tolerances& tol) {
  require_valid_track(track);
  const double net = track.dist_m.back() - track.dist_m.front();
  if (std::abs(net) < tol.dist_m) return DistanceTrend::AboutSame;
  return net < 0.0 ? DistanceTrend::Closer : DistanceTrend::Farther;
}

bool trajectory_matches(const EventTrack& track, const Tolerances& tol,
                        const std::vector<DoABucket>& from_region,
                        const std::vector<DoABucket>& to_region,
                        SignConvention convention) {
  const MotionSummary s = summarize_motion(track, tol, convention);
  const bool from_ok =
      std::find(from_region.begin(), from_region.end(), s.start_bucket) != from_region.end();
  const bool to_ok =
      std::find(to_region.begin(), to_region.end(), s.end_bucket) != to_region.end();
  return from_ok && to_ok && s.total_doa_change_deg >= tol.doa_deg;
}

CrossSourceResult cross_source_compare(const SceneMetadata& scene, CompareAspect aspect,
                                       const Tolerances& tol, SignConvention convention,
                                       ChangeMode mode) {
  if (scene.tracks.size() < 2) {
    throw_validation("cross_source_compare: needs at least 2 tracks, got " +
                     std::to_string(scene.tracks.size()));
  }
  CrossSourceResult result;
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t i = 0; i < scene.tracks.size(); ++i) {
    const EventTrack& track = scene.tracks[i];
    const MotionSummary s = summarize_motion(track, tol, convention);
    double value = 0.0;
    switch (aspect) {
      case CompareAspect::ClosestApproach:
        value = s.min_dist_m;
        break;
      case CompareAspect::LargestDirectionShift:
        value = mode == ChangeMode::NetChange ? std::abs(s.net_doa_change_deg)
                                              : s.total_doa_change_deg;
        break;
      case CompareAspect::LargestDistanceChange:
        value = mode == ChangeMode::NetChange ? std::abs(s.net_dist_change_m)
                                              : s.total_dist_change_m;
        break;
    }
    result.per_track.emplace_back(track.label, value);

    bool better = false;
    if (i == 0) {
      better = true;
    } else {
      const bool strictly = aspect == CompareAspect::ClosestApproach ? value < best_value
                                                                     : value > best_value;
      if (strictly) {
        better = true;
      } else if (value == best_value) {
        const EventTrack& incumbent = scene.tracks[best];
        if (track.first_frame() < incumbent.first_frame() ||
            (track.first_frame() == incumbent.first_frame() && track.label < incumbent.label)) {
          better = true;
        }
      }
    }
    if (better) {
      best = i;
      best_value = value;
    }
  }
  result.winner = scene.tracks[best].label;
  return result;
}

std::string dominant_aspect_name(DominantAspect aspect) {
  switch (aspect) {
    case DominantAspect::DirectionMore: return "Direction changed more";
    case DominantAspect::DistanceMore: return "Distance changed more";
    case DominantAspect::Comparable: return "Comparable";
  }
  return "Comparable";
}

DominantAspect dominant_change(const EventTrack& track, const Tolerances& tol, double margin,
                               SignConvention convention, ChangeMode mode) {
  const MotionSummary s = summarize_motion(track, tol, convention);
  double doa_fraction = s.doa_range_fraction;
  double dist_fraction = s.dist_range_fraction;
  if (mode == ChangeMode::NetChange) {
    doa_fraction = std::abs(s.net_doa_change_deg) / 180.0;
    dist_fraction = std::abs(s.net_dist_change_m) / kMaxDistanceM;
  }
  if (std::abs(doa_fraction - dist_fraction) <= margin) return DominantAspect::Comparable;
  return doa_fraction > dist_fraction ? DominantAspect::DirectionMore
                                      : DominantAspect::DistanceMore;
}

}  // namespace saqa
