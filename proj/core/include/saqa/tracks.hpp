#pragma once

#include <map>
#include <string>
#include <vector>

namespace saqa {

inline constexpr double kMaxDistanceM = 6.0;
inline constexpr double kMaxAzimuthDeg = 90.0;

// One source's time series under a single event label. Frames are strictly
// increasing 100 ms indices; gaps are preserved, never interpolated.
struct EventTrack {
  std::string label;
  int class_id = -1;
  int source_id = -1;
  std::vector<std::size_t> frames;
  std::vector<double> doa_deg;  // [-90, 90]
  std::vector<double> dist_m;   // [0, 6]

  std::size_t first_frame() const { return frames.empty() ? 0 : frames.front(); }
};

struct SceneMetadata {
  std::string clip_id;
  std::size_t num_frames = 0;
  std::vector<EventTrack> tracks;
};

using ClassMap = std::map<int, std::string>;

// Parses "frame,class_id,source_id,azimuth,distance" rows. An optional header
// line is detected by a non-numeric first field; CRLF and LF both accepted.
// Distances are meters; when any value exceeds 6.0 the whole column is taken
// to be centimeters and divided by 100 before range validation. Rows are
// grouped by (class_id, source_id) into frame-sorted tracks; duplicate
// (frame, class, source) rows, malformed rows and out-of-range values are
// validation errors that name the offending row number. Class ids missing
// from the map get the synthetic label "class<id>".
SceneMetadata parse_metadata_csv(const std::string& text, const ClassMap& classes,
                                 const std::string& clip_id);

// Inverse of parse_metadata_csv for valid scenes (row order: track order,
// then frame order). Distances are written in meters.
std::string scene_to_csv(const SceneMetadata& scene);

// Renders the structured-attribute prompt: a JSON array of objects with keys
// exactly "Event", "DoA", "Source distance", "Time frames" in that order,
// sorted by first frame then label. DoA is rounded to 0.1 deg, distance to
// 0.01 m, times to 0.1 s. Output bytes are stable for fixed inputs.
std::string tracks_to_prompt(const SceneMetadata& scene, double frame_period_s = 0.1);

// Returns every invariant violation (ranges, strictly increasing frames,
// aligned lengths, frame indices below num_frames); empty means valid.
std::vector<std::string> validate_scene(const SceneMetadata& scene);

}  // namespace saqa
