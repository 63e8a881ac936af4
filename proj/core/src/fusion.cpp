#include "saqa/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "saqa/rng.hpp"

namespace saqa {
namespace {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

RealGrid identity_grid(std::size_t n) {
  RealGrid g(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) g(i, i) = 1.0;
  return g;
}

// y = M x for a d_out x d_in matrix.
void mat_vec(const RealGrid& m, const double* x, double* y) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * x[c];
    y[r] = acc;
  }
}

}  // namespace

AgmOutput mock_agm(std::size_t num_frames, const std::vector<std::string>& class_names,
                   std::uint64_t seed) {
  if (num_frames == 0) throw_validation("mock_agm: frame count must be positive");
  if (class_names.empty()) throw_validation("mock_agm: class list is empty");
  constexpr std::size_t kEmbedDim = 512;

  AgmOutput out;
  out.probs = RealGrid(num_frames, class_names.size());
  out.embeddings = RealGrid(class_names.size(), kEmbedDim);

  for (std::size_t n = 0; n < class_names.size(); ++n) {
    const std::uint64_t name_hash = fnv1a64(class_names[n]);

    DetRng embed_rng(mix_seed(name_hash, mix_seed(seed, 0x656d6264ULL)));
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < kEmbedDim; ++j) {
      const double v = embed_rng.uniform(-1.0, 1.0);
      out.embeddings(n, j) = v;
      norm_sq += v * v;
    }
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (std::size_t j = 0; j < kEmbedDim; ++j) out.embeddings(n, j) *= inv_norm;

    DetRng prob_rng(mix_seed(name_hash, mix_seed(seed, 0x70726f62ULL)));
    for (std::size_t t = 0; t < num_frames; ++t) {
      out.probs(t, n) = prob_rng.uniform();
    }
  }
  return out;
}

Tensor3 encode_tokens(const FeatureTensor& features, std::size_t num_classes,
                      std::size_t embed_dim, std::uint64_t seed) {
  if (num_classes == 0 || embed_dim == 0) {
    throw_validation("encode_tokens: class count and embed dim must be positive");
  }
  const std::size_t num_frames = features.num_frames();
  const std::size_t mel_bins = features.mel_bins();
  if (num_frames == 0 || mel_bins == 0) throw_validation("encode_tokens: empty feature tensor");

  // Seeded projection matrix, embed_dim x mel_bins, scaled like a random
  // Gaussian init so token magnitudes stay O(1).
  DetRng proj_rng(mix_seed(seed, 0x746f6b65ULL));
  RealGrid proj(embed_dim, mel_bins);
  const double scale = 1.0 / std::sqrt(static_cast<double>(mel_bins));
  for (auto& v : proj.data()) v = proj_rng.uniform(-1.0, 1.0) * scale;

  Tensor3 out(num_frames, num_classes, embed_dim);
  std::vector<double> frame(mel_bins), token(embed_dim);
  for (std::size_t t = 0; t < num_frames; ++t) {
    // Downmix the 4 channels, standardize the frame, apply GELU.
    for (std::size_t m = 0; m < mel_bins; ++m) {
      frame[m] = (features.data(0, t, m) + features.data(1, t, m) +
                  features.data(2, t, m) + features.data(3, t, m)) / 4.0;
    }
    double mean = 0.0;
    for (double v : frame) mean += v;
    mean /= static_cast<double>(mel_bins);
    double var = 0.0;
    for (double v : frame) var += (v - mean) * (v - mean);
    var /= static_cast<double>(mel_bins);
    const double inv_std = 1.0 / std::sqrt(var + 1e-8);
    for (double& v : frame) v = gelu((v - mean) * inv_std);

    mat_vec(proj, frame.data(), token.data());
    for (std::size_t n = 0; n < num_classes; ++n) {
      for (std::size_t j = 0; j < embed_dim; ++j) out(t, n, j) = token[j];
    }
  }
  return out;
}

Tensor3 cross_attention(const Tensor3& tokens, const RealGrid& embeddings,
                        const AttentionParams& params) {
  const std::size_t num_frames = tokens.dim0();
  const std::size_t num_classes = tokens.dim1();
  const std::size_t dim = tokens.dim2();
  if (embeddings.rows() != num_classes || embeddings.cols() != dim) {
    throw_validation("cross_attention: embedding shape mismatch");
  }
  auto check_proj = [&](const std::optional<RealGrid>& p, const char* name) {
    if (p && (p->rows() != dim || p->cols() != dim)) {
      throw_validation(std::string("cross_attention: ") + name + " projection must be d x d");
    }
  };
  check_proj(params.w_query, "query");
  check_proj(params.w_key, "key");
  check_proj(params.w_value, "value");

  // Projected keys/values, shared across queries.
  RealGrid keys = embeddings, values = embeddings;
  if (params.w_key) {
    for (std::size_t n = 0; n < num_classes; ++n) {
      std::vector<double> row(dim);
      for (std::size_t j = 0; j < dim; ++j) row[j] = embeddings(n, j);
      std::vector<double> proj(dim);
      mat_vec(*params.w_key, row.data(), proj.data());
      for (std::size_t j = 0; j < dim; ++j) keys(n, j) = proj[j];
    }
  }
  if (params.w_value) {
    for (std::size_t n = 0; n < num_classes; ++n) {
      std::vector<double> row(dim);
      for (std::size_t j = 0; j < dim; ++j) row[j] = embeddings(n, j);
      std::vector<double> proj(dim);
      mat_vec(*params.w_value, row.data(), proj.data());
      for (std::size_t j = 0; j < dim; ++j) values(n, j) = proj[j];
    }
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  Tensor3 out(num_frames, num_classes, dim);
  std::vector<double> query(dim), scores(num_classes);
  for (std::size_t t = 0; t < num_frames; ++t) {
    for (std::size_t n = 0; n < num_classes; ++n) {
      for (std::size_t j = 0; j < dim; ++j) query[j] = tokens(t, n, j);
      if (params.w_query) {
        std::vector<double> proj(dim);
        mat_vec(*params.w_query, query.data(), proj.data());
        query = proj;
      }
      double max_score = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < num_classes; ++k) {
        double dot = 0.0;
        for (std::size_t j = 0; j < dim; ++j) dot += query[j] * keys(k, j);
        scores[k] = dot * scale;
        max_score = std::max(max_score, scores[k]);
      }
      double denom = 0.0;
      for (std::size_t k = 0; k < num_classes; ++k) {
        scores[k] = std::exp(scores[k] - max_score);
        denom += scores[k];
      }
      for (std::size_t j = 0; j < dim; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < num_classes; ++k) acc += scores[k] * values(k, j);
        out(t, n, j) = acc / denom;
      }
    }
  }
  return out;
}

Tensor3 fuse_and_gate(const Tensor3& tokens, const Tensor3& attended, const RealGrid& probs) {
  const std::size_t num_frames = tokens.dim0();
  const std::size_t num_classes = tokens.dim1();
  const std::size_t dim = tokens.dim2();
  if (attended.dim0() != num_frames || attended.dim1() != num_classes || attended.dim2() != dim) {
    throw_validation("fuse_and_gate: token/attention shape mismatch");
  }
  if (probs.rows() != num_frames || probs.cols() != num_classes) {
    throw_validation("fuse_and_gate: probability grid shape mismatch");
  }
  for (std::size_t t = 0; t < num_frames; ++t) {
    for (std::size_t n = 0; n < num_classes; ++n) {
      const double p = probs(t, n);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw_validation("fuse_and_gate: probability outside [0, 1] at frame " +
                         std::to_string(t) + ", class " + std::to_string(n));
      }
    }
  }

  Tensor3 out(num_frames, num_classes, 2 * dim);
  for (std::size_t t = 0; t < num_frames; ++t) {
    for (std::size_t n = 0; n < num_classes; ++n) {
      const double p = probs(t, n);
      if (p == 0.0) continue;  // slice stays exactly zero
      for (std::size_t j = 0; j < dim; ++j) {
        out(t, n, j) = p * tokens(t, n, j);
        out(t, n, dim + j) = p * attended(t, n, j);
      }
    }
  }
  return out;
}

HeadParams zero_head_params(std::size_t tracks, std::size_t classes, std::size_t feature_dim) {
  HeadParams p;
  p.tracks = tracks;
  p.classes = classes;
  p.w_doa = RealGrid(tracks * classes * 2, feature_dim, 0.0);
  p.b_doa.assign(tracks * classes * 2, 0.0);
  p.w_dist = RealGrid(tracks * classes, feature_dim, 0.0);
  p.b_dist.assign(tracks * classes, 0.0);
  return p;
}

HeadParams random_head_params(std::size_t tracks, std::size_t classes, std::size_t feature_dim,
                              std::uint64_t seed) {
  HeadParams p = zero_head_params(tracks, classes, feature_dim);
  DetRng rng(mix_seed(seed, 0x68656164ULL));
  const double scale = 1.0 / std::sqrt(static_cast<double>(feature_dim));
  for (auto& v : p.w_doa.data()) v = rng.uniform(-1.0, 1.0) * scale;
  for (auto& v : p.b_doa) v = rng.uniform(-0.1, 0.1);
  for (auto& v : p.w_dist.data()) v = rng.uniform(-1.0, 1.0) * scale;
  for (auto& v : p.b_dist) v = rng.uniform(-0.1, 0.1);
  return p;
}

HeadOutputs predict_heads(const Tensor3& fused, const HeadParams& params) {
  const std::size_t num_frames = fused.dim0();
  const std::size_t num_classes = fused.dim1();
  const std::size_t feature_dim = fused.dim2();
  const std::size_t tracks = params.tracks;
  const std::size_t classes = params.classes;
  if (tracks == 0 || classes == 0) throw_validation("predict_heads: K and C must be positive");
  if (params.w_doa.rows() != tracks * classes * 2 || params.w_doa.cols() != feature_dim ||
      params.b_doa.size() != tracks * classes * 2 ||
      params.w_dist.rows() != tracks * classes || params.w_dist.cols() != feature_dim ||
      params.b_dist.size() != tracks * classes) {
    throw_validation("predict_heads: head parameter shape mismatch");
  }

  HeadOutputs out;
  out.doa = Tensor4(num_frames, tracks, classes, 2);
  out.dist = Tensor3(num_frames, tracks, classes);

  std::vector<double> frame(feature_dim), doa_raw(tracks * classes * 2),
      dist_raw(tracks * classes);
  for (std::size_t t = 0; t < num_frames; ++t) {
    // Class-averaged frame feature.
    for (std::size_t j = 0; j < feature_dim; ++j) {
      double acc = 0.0;
      for (std::size_t n = 0; n < num_classes; ++n) acc += fused(t, n, j);
      frame[j] = acc / static_cast<double>(num_classes);
    }
    mat_vec(params.w_doa, frame.data(), doa_raw.data());
    mat_vec(params.w_dist, frame.data(), dist_raw.data());
    for (std::size_t k = 0; k < tracks; ++k) {
      for (std::size_t c = 0; c < classes; ++c) {
        const std::size_t base = (k * classes + c) * 2;
        out.doa(t, k, c, 0) = std::tanh(doa_raw[base] + params.b_doa[base]);
        out.doa(t, k, c, 1) = std::tanh(doa_raw[base + 1] + params.b_doa[base + 1]);
        const std::size_t di = k * classes + c;
        out.dist(t, k, c) = std::max(0.0, dist_raw[di] + params.b_dist[di]);
      }
    }
  }
  return out;
}

namespace {

NamedTensor grid_section(const RealGrid& g) {
  NamedTensor t;
  t.dims = {static_cast<std::uint32_t>(g.rows()), static_cast<std::uint32_t>(g.cols())};
  t.values.reserve(g.data().size());
  for (double v : g.data()) t.values.push_back(static_cast<float>(v));
  return t;
}

NamedTensor vec_section(const std::vector<double>& v) {
  NamedTensor t;
  t.dims = {static_cast<std::uint32_t>(v.size())};
  t.values.reserve(v.size());
  for (double x : v) t.values.push_back(static_cast<float>(x));
  return t;
}

RealGrid section_grid(const ParamBundle& bundle, const std::string& name) {
  auto it = bundle.find(name);
  if (it == bundle.end()) throw_validation("parameter bundle missing section '" + name + "'");
  if (it->second.dims.size() != 2) throw_validation("section '" + name + "' must be rank 2");
  RealGrid g(it->second.dims[0], it->second.dims[1]);
  for (std::size_t i = 0; i < it->second.values.size(); ++i) {
    g.data()[i] = static_cast<double>(it->second.values[i]);
  }
  return g;
}

std::vector<double> section_vec(const ParamBundle& bundle, const std::string& name) {
  auto it = bundle.find(name);
  if (it == bundle.end()) throw_validation("parameter bundle missing section '" + name + "'");
  if (it->second.dims.size() != 1) throw_validation("section '" + name + "' must be rank 1");
  std::vector<double> v(it->second.values.begin(), it->second.values.end());
  return v;
}

}  // namespace

ParamBundle head_params_to_bundle(const HeadParams& params) {
  ParamBundle bundle;
  NamedTensor shape;
  shape.dims = {2};
  shape.values = {static_cast<float>(params.tracks), static_cast<float>(params.classes)};
  bundle["head_shape"] = shape;
  bundle["w_doa"] = grid_section(params.w_doa);
  bundle["b_doa"] = vec_section(params.b_doa);
  bundle["w_dist"] = grid_section(params.w_dist);
  bundle["b_dist"] = vec_section(params.b_dist);
  return bundle;
}

HeadParams head_params_from_bundle(const ParamBundle& bundle) {
  HeadParams p;
  const auto shape = section_vec(bundle, "head_shape");
  if (shape.size() != 2) throw_validation("head_shape section must hold {K, C}");
  p.tracks = static_cast<std::size_t>(shape[0]);
  p.classes = static_cast<std::size_t>(shape[1]);
  p.w_doa = section_grid(bundle, "w_doa");
  p.b_doa = section_vec(bundle, "b_doa");
  p.w_dist = section_grid(bundle, "w_dist");
  p.b_dist = section_vec(bundle, "b_dist");
  return p;
}

}  // namespace saqa
