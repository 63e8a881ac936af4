#include "saqa/tracks.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "saqa/common.hpp"

namespace saqa {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_int(const std::string& s, long& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

struct Row {
  std::size_t line_no;
  long frame, class_id, source_id;
  double azimuth, distance;
};

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

SceneMetadata parse_metadata_csv(const std::string& text, const ClassMap& classes,
                                 const std::string& clip_id) {
  if (clip_id.empty()) throw_validation("parse_metadata_csv: clip id must be non-empty");

  std::vector<Row> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);

    if (first_content_line) {
      first_content_line = false;
      long probe;
      if (!parse_int(fields[0], probe)) continue;  // header line
    }
    if (fields.size() != 5) {
      throw_validation("row " + std::to_string(line_no) + ": expected 5 fields, got " +
                       std::to_string(fields.size()));
    }
    Row r;
    r.line_no = line_no;
    if (!parse_int(fields[0], r.frame) || r.frame < 0) {
      throw_validation("row " + std::to_string(line_no) + ": bad frame index '" + fields[0] + "'");
    }
    if (!parse_int(fields[1], r.class_id) || r.class_id < 0) {
      throw_validation("row " + std::to_string(line_no) + ": bad class id '" + fields[1] + "'");
    }
    if (!parse_int(fields[2], r.source_id) || r.source_id < 0) {
      throw_validation("row " + std::to_string(line_no) + ": bad source id '" + fields[2] + "'");
    }
    if (!parse_real(fields[3], r.azimuth)) {
      throw_validation("row " + std::to_string(line_no) + ": bad azimuth '" + fields[3] + "'");
    }
    if (!parse_real(fields[4], r.distance) || r.distance < 0.0) {
      throw_validation("row " + std::to_string(line_no) + ": bad distance '" + fields[4] + "'");
    }
    rows.push_back(r);
  }

  // Centimeter auto-detection: any distance beyond the 6 m range means the
  // column is centimeters.
  bool centimeters = false;
  for (const Row& r : rows) {
    if (r.distance > kMaxDistanceM) centimeters = true;
  }
  if (centimeters) {
    for (Row& r : rows) r.distance /= 100.0;
  }

  for (const Row& r : rows) {
    if (r.azimuth < -kMaxAzimuthDeg || r.azimuth > kMaxAzimuthDeg) {
      throw_validation("row " + std::to_string(r.line_no) + ": azimuth " +
                       std::to_string(r.azimuth) + " outside [-90, 90]");
    }
    if (r.distance > kMaxDistanceM) {
      throw_validation("row " + std::to_string(r.line_no) + ": distance " +
                       std::to_string(r.distance) + " outside [0, 6] after unit normalization");
    }
  }

  // Group by (class_id, source_id); the map keeps track order canonical so
  // shuffled input rows produce an identical scene.
  std::map<std::pair<long, long>, std::vector<Row>> groups;
  for (const Row& r : rows) {
    groups[{r.class_id, r.source_id}].push_back(r);
  }

  SceneMetadata scene;
  scene.clip_id = clip_id;
  for (auto& [key, group] : groups) {
    std::sort(group.begin(), group.end(),
              [](const Row& a, const Row& b) { return a.frame < b.frame; });
    for (std::size_t i = 1; i < group.size(); ++i) {
      if (group[i].frame == group[i - 1].frame) {
        throw_validation("row " + std::to_string(group[i].line_no) + ": duplicate (frame " +
                         std::to_string(group[i].frame) + ", class " + std::to_string(key.first) +
                         ", source " + std::to_string(key.second) + ")");
      }
    }
    EventTrack track;
    track.class_id = static_cast<int>(key.first);
    track.source_id = static_cast<int>(key.second);
    auto it = classes.find(track.class_id);
    track.label = it != classes.end() ? it->second : "class" + std::to_string(key.first);
    for (const Row& r : group) {
      track.frames.push_back(static_cast<std::size_t>(r.frame));
      track.doa_deg.push_back(r.azimuth);
      track.dist_m.push_back(r.distance);
      scene.num_frames = std::max(scene.num_frames, static_cast<std::size_t>(r.frame) + 1);
    }
    scene.tracks.push_back(std::move(track));
  }
  return scene;
}

std::string scene_to_csv(const SceneMetadata& scene) {
  std::string out = "frame,class_id,source_id,azimuth,distance\n";
  char buf[128];
  for (const EventTrack& track : scene.tracks) {
    for (std::size_t i = 0; i < track.frames.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.9g,%.9g\n", track.frames[i],
                    track.class_id, track.source_id, track.doa_deg[i], track.dist_m[i]);
      out += buf;
    }
  }
  return out;
}

std::string tracks_to_prompt(const SceneMetadata& scene, double frame_period_s) {
  auto diags = validate_scene(scene);
  if (!diags.empty()) throw_validation("tracks_to_prompt: invalid scene: " + diags.front());

  std::vector<const EventTrack*> order;
  order.reserve(scene.tracks.size());
  for (const auto& t : scene.tracks) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const EventTrack* a, const EventTrack* b) {
    if (a->first_frame() != b->first_frame()) return a->first_frame() < b->first_frame();
    return a->label < b->label;
  });

  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const EventTrack* track : order) {
    nlohmann::ordered_json obj;
    obj["Event"] = track->label;
    nlohmann::ordered_json doa = nlohmann::ordered_json::array();
    for (double v : track->doa_deg) doa.push_back(round_to(v, 0.1));
    obj["DoA"] = std::move(doa);
    nlohmann::ordered_json dist = nlohmann::ordered_json::array();
    for (double v : track->dist_m) dist.push_back(round_to(v, 0.01));
    obj["Source distance"] = std::move(dist);
    nlohmann::ordered_json times = nlohmann::ordered_json::array();
    for (std::size_t f : track->frames) {
      times.push_back(round_to(static_cast<double>(f) * frame_period_s, 0.1));
    }
    obj["Time frames"] = std::move(times);
    arr.push_back(std::move(obj));
  }
  return arr.dump();
}

std::vector<std::string> validate_scene(const SceneMetadata& scene) {
  std::vector<std::string> diags;
  if (scene.clip_id.empty()) diags.push_back("clip id is empty");
  for (std::size_t ti = 0; ti < scene.tracks.size(); ++ti) {
    const EventTrack& t = scene.tracks[ti];
    const std::string id = "track " + std::to_string(ti) + " ('" + t.label + "')";
    if (t.frames.empty()) {
      diags.push_back(id + ": empty frame list");
      continue;
    }
    if (t.frames.size() != t.doa_deg.size() || t.frames.size() != t.dist_m.size()) {
      diags.push_back(id + ": frame/DoA/distance lengths differ");
      continue;
    }
    for (std::size_t i = 0; i < t.frames.size(); ++i) {
      if (i > 0 && t.frames[i] <= t.frames[i - 1]) {
        diags.push_back(id + ": frames not strictly increasing at index " + std::to_string(i));
      }
      if (t.frames[i] >= scene.num_frames) {
        diags.push_back(id + ": frame " + std::to_string(t.frames[i]) +
                        " beyond scene length " + std::to_string(scene.num_frames));
      }
      if (t.doa_deg[i] < -kMaxAzimuthDeg || t.doa_deg[i] > kMaxAzimuthDeg) {
        diags.push_back(id + ": DoA " + std::to_string(t.doa_deg[i]) +
                        " outside [-90, 90] at index " + std::to_string(i));
      }
      if (t.dist_m[i] < 0.0 || t.dist_m[i] > kMaxDistanceM) {
        diags.push_back(id + ": distance " + std::to_string(t.dist_m[i]) +
                        " outside [0, 6] at index " + std::to_string(i));
      }
    }
  }
  return diags;
}

}  // namespace saqa
