#include "saqa/accddoa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

namespace saqa {
namespace {

constexpr std::size_t kMaxTracks = 4;  // K! enumeration stays exact and cheap

void require_same_shape(const AccddoaTensor& a, const AccddoaTensor& b) {
  if (!a.data.same_shape(b.data)) throw_validation("accddoa: tensor shapes differ");
}

}  // namespace

AccddoaTensor encode_targets(const std::vector<FrameLabel>& labels, std::size_t num_frames,
                             std::size_t tracks, std::size_t classes) {
  if (tracks == 0 || tracks > kMaxTracks) {
    throw_validation("encode_targets: track capacity must be in [1, 4]");
  }
  if (classes == 0) throw_validation("encode_targets: class count must be positive");

  AccddoaTensor out;
  out.data = Tensor4(num_frames, tracks, classes, 3);
  std::vector<bool> occupied(num_frames * tracks * classes, false);
  for (const FrameLabel& l : labels) {
    if (l.frame >= num_frames) {
      throw_validation("encode_targets: frame " + std::to_string(l.frame) + " out of range");
    }
    if (l.class_id >= classes) {
      throw_validation("encode_targets: class " + std::to_string(l.class_id) + " out of range");
    }
    if (l.track_id >= tracks) {
      throw_validation("encode_targets: more than " + std::to_string(tracks) +
                       " concurrent tracks of class " + std::to_string(l.class_id) +
                       " in frame " + std::to_string(l.frame));
    }
    if (l.azimuth_deg < -kMaxAzimuthDeg || l.azimuth_deg > kMaxAzimuthDeg) {
      throw_validation("encode_targets: azimuth " + std::to_string(l.azimuth_deg) +
                       " outside [-90, 90]");
    }
    if (l.distance_m < 0.0 || l.distance_m > kMaxDistanceM) {
      throw_validation("encode_targets: distance " + std::to_string(l.distance_m) +
                       " outside [0, 6]");
    }
    const std::size_t cell = (l.frame * tracks + l.track_id) * classes + l.class_id;
    if (occupied[cell]) {
      throw_validation("encode_targets: duplicate label at frame " + std::to_string(l.frame) +
                       ", class " + std::to_string(l.class_id) + ", track " +
                       std::to_string(l.track_id));
    }
    occupied[cell] = true;
    const double theta = deg_to_rad(l.azimuth_deg);
    out.data(l.frame, l.track_id, l.class_id, 0) = std::cos(theta);
    out.data(l.frame, l.track_id, l.class_id, 1) = std::sin(theta);
    out.data(l.frame, l.track_id, l.class_id, 2) = l.distance_m / kMaxDistanceM;
  }
  return out;
}

double pit_loss(const AccddoaTensor& pred, const AccddoaTensor& target,
                double distance_mse_weight) {
  require_same_shape(pred, target);
  const std::size_t num_frames = pred.num_frames();
  const std::size_t tracks = pred.tracks();
  const std::size_t classes = pred.classes();
  if (tracks > kMaxTracks) throw_validation("pit_loss: K must be <= 4");
  if (num_frames == 0 || tracks == 0 || classes == 0) return 0.0;

  std::vector<std::size_t> perm(tracks);
  double loss_sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      // MSE over all (t, k, component) cells of this class under the
      // assignment pred track perm[k] <-> target track k, plus the optional
      // masked distance term.
      double sq_sum = 0.0;
      double dist_sq_sum = 0.0;
      std::size_t active_cells = 0;
      for (std::size_t t = 0; t < num_frames; ++t) {
        for (std::size_t k = 0; k < tracks; ++k) {
          for (std::size_t j = 0; j < 3; ++j) {
            const double d = pred.data(t, perm[k], c, j) - target.data(t, k, c, j);
            sq_sum += d * d;
          }
          const double tx = target.data(t, k, c, 0);
          const double ty = target.data(t, k, c, 1);
          if (tx != 0.0 || ty != 0.0) {
            ++active_cells;
            const double dd = pred.data(t, perm[k], c, 2) - target.data(t, k, c, 2);
            dist_sq_sum += dd * dd;
          }
        }
      }
      double loss = sq_sum / static_cast<double>(num_frames * tracks * 3);
      if (distance_mse_weight > 0.0 && active_cells > 0) {
        loss += distance_mse_weight * dist_sq_sum / static_cast<double>(active_cells);
      }
      best = std::min(best, loss);
    } while (std::next_permutation(perm.begin(), perm.end()));
    loss_sum += best;
  }
  return loss_sum / static_cast<double>(classes);
}

std::vector<FrameLabel> decode_predictions(const AccddoaTensor& tensor,
                                           double activity_threshold) {
  if (!(activity_threshold > 0.0 && activity_threshold < 1.0)) {
    throw_validation("decode_predictions: threshold must be in (0, 1)");
  }
  std::vector<FrameLabel> out;
  for (std::size_t t = 0; t < tensor.num_frames(); ++t) {
    for (std::size_t k = 0; k < tensor.tracks(); ++k) {
      for (std::size_t c = 0; c < tensor.classes(); ++c) {
        const double x = tensor.data(t, k, c, 0);
        const double y = tensor.data(t, k, c, 1);
        if (std::hypot(x, y) <= activity_threshold) continue;
        FrameLabel l;
        l.frame = t;
        l.track_id = k;
        l.class_id = c;
        l.azimuth_deg = std::clamp(rad_to_deg(std::atan2(y, x)), -kMaxAzimuthDeg, kMaxAzimuthDeg);
        l.distance_m = kMaxDistanceM * std::clamp(tensor.data(t, k, c, 2), 0.0, 1.0);
        out.push_back(l);
      }
    }
  }
  return out;
}

namespace {

struct PairStats {
  std::size_t tp = 0, fp = 0, fn = 0;
  double abs_az_sum = 0.0;
  double rde_sum = 0.0;
  std::size_t matched = 0;
  std::size_t rde_count = 0;
  std::size_t zero_dist_refs = 0;
};

// Exact min-cost assignment by enumeration over the smaller side (<= 4
// entries per (frame, class) cell in practice; capped to keep K! exact).
void match_cell(const std::vector<const FrameLabel*>& preds,
                const std::vector<const FrameLabel*>& refs, const SeldOptions& options,
                PairStats& stats) {
  const std::size_t np = preds.size(), nr = refs.size();
  if (np == 0 && nr == 0) return;
  if (np == 0) {
    stats.fn += nr;
    return;
  }
  if (nr == 0) {
    stats.fp += np;
    return;
  }

  // Permute indices of the larger side over slots of the smaller side.
  const bool preds_larger = np >= nr;
  const std::size_t big = preds_larger ? np : nr;
  const std::size_t small = preds_larger ? nr : np;
  std::vector<std::size_t> perm(big);
  std::iota(perm.begin(), perm.end(), 0);

  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_perm;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < small; ++i) {
      const FrameLabel* p = preds_larger ? preds[perm[i]] : preds[i];
      const FrameLabel* r = preds_larger ? refs[i] : refs[perm[i]];
      cost += std::abs(p->azimuth_deg - r->azimuth_deg);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  for (std::size_t i = 0; i < small; ++i) {
    const FrameLabel* p = preds_larger ? preds[best_perm[i]] : preds[i];
    const FrameLabel* r = preds_larger ? refs[i] : refs[best_perm[i]];
    const double d_az = std::abs(p->azimuth_deg - r->azimuth_deg);
    ++stats.matched;
    stats.abs_az_sum += d_az;

    bool distance_ok = true;
    if (r->distance_m == 0.0) {
      ++stats.zero_dist_refs;  // relative error undefined, excluded from RDE
    } else {
      const double rde = std::abs(p->distance_m - r->distance_m) / r->distance_m;
      stats.rde_sum += rde;
      ++stats.rde_count;
      if (options.distance_gated_fscore) distance_ok = rde <= options.rde_threshold;
    }
    if (d_az <= options.angle_threshold_deg && distance_ok) {
      ++stats.tp;
    } else {
      ++stats.fp;
      ++stats.fn;
    }
  }
  // unmatched remainder
  if (preds_larger) {
    stats.fp += np - small;
  } else {
    stats.fn += nr - small;
  }
}

}  // namespace

SeldMetrics seld_metrics(const std::vector<FrameLabel>& preds,
                         const std::vector<FrameLabel>& refs, const SeldOptions& options) {
  if (options.angle_threshold_deg <= 0.0 || options.rde_threshold <= 0.0) {
    throw_validation("seld_metrics: thresholds must be positive");
  }

  std::map<std::pair<std::size_t, std::size_t>,
           std::pair<std::vector<const FrameLabel*>, std::vector<const FrameLabel*>>>
      cells;
  for (const FrameLabel& p : preds) cells[{p.frame, p.class_id}].first.push_back(&p);
  for (const FrameLabel& r : refs) cells[{r.frame, r.class_id}].second.push_back(&r);

  PairStats stats;
  for (auto& [key, cell] : cells) {
    if (cell.first.size() > 6 || cell.second.size() > 6) {
      throw_validation("seld_metrics: more than 6 concurrent events per (frame, class)");
    }
    match_cell(cell.first, cell.second, options, stats);
  }

  SeldMetrics m;
  m.tp = stats.tp;
  m.fp = stats.fp;
  m.fn = stats.fn;
  m.matched_pairs = stats.matched;
  m.zero_distance_refs = stats.zero_dist_refs;
  const double denom = 2.0 * stats.tp + stats.fp + stats.fn;
  m.f_score = denom == 0.0 ? 1.0 : 2.0 * stats.tp / denom;
  if (stats.matched > 0) {
    m.doa_error_deg = stats.abs_az_sum / static_cast<double>(stats.matched);
  }
  if (stats.rde_count > 0) {
    m.rel_dist_error = stats.rde_sum / static_cast<double>(stats.rde_count);
  }
  return m;
}

std::string seld_metrics_json(const SeldMetrics& metrics) {
  nlohmann::ordered_json j;
  j["f_score"] = metrics.f_score;
  if (metrics.doa_error_deg) {
    j["doa_error_deg"] = *metrics.doa_error_deg;
  } else {
    j["doa_error_deg"] = nullptr;
  }
  if (metrics.rel_dist_error) {
    j["rel_dist_error"] = *metrics.rel_dist_error;
  } else {
    j["rel_dist_error"] = nullptr;
  }
  j["tp"] = metrics.tp;
  j["fp"] = metrics.fp;
  j["fn"] = metrics.fn;
  j["matched_pairs"] = metrics.matched_pairs;
  j["zero_distance_refs"] = metrics.zero_distance_refs;
  return j.dump();
}

std::string seld_metrics_table(const SeldMetrics& metrics) {
  char line[128];
  std::string out = "F-Score | DoA Error | Rel. Dist. Error\n";
  std::string doa = "-", rde = "-";
  char buf[32];
  if (metrics.doa_error_deg) {
    std::snprintf(buf, sizeof(buf), "%.2f", *metrics.doa_error_deg);
    doa = buf;
  }
  if (metrics.rel_dist_error) {
    std::snprintf(buf, sizeof(buf), "%.3f", *metrics.rel_dist_error);
    rde = buf;
  }
  std::snprintf(line, sizeof(line), "%.1f | %s | %s\n", 100.0 * metrics.f_score, doa.c_str(),
                rde.c_str());
  out += line;
  return out;
}

std::vector<FrameLabel> scene_to_labels(const SceneMetadata& scene) {
  std::vector<FrameLabel> out;
  for (const EventTrack& track : scene.tracks) {
    for (std::size_t i = 0; i < track.frames.size(); ++i) {
      FrameLabel l;
      l.frame = track.frames[i];
      l.class_id = track.class_id >= 0 ? static_cast<std::size_t>(track.class_id) : 0;
      l.track_id = track.source_id >= 0 ? static_cast<std::size_t>(track.source_id) : 0;
      l.azimuth_deg = track.doa_deg[i];
      l.distance_m = track.dist_m[i];
      out.push_back(l);
    }
  }
  return out;
}

}  // namespace saqa
