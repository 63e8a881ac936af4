#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "saqa/common.hpp"
#include "saqa/features.hpp"
#include "saqa/safz.hpp"

namespace saqa {

// Frame-level class probabilities (T x N) and class text embeddings (N x d).
struct AgmOutput {
  RealGrid probs;
  RealGrid embeddings;
  std::size_t num_frames() const { return probs.rows(); }
  std::size_t num_classes() const { return probs.cols(); }
  std::size_t embed_dim() const { return embeddings.cols(); }
};

// Deterministic stand-in for a grounding model. Embedding rows depend only on
// (class name, seed) and are unit-norm; probability columns depend only on
// (class name, seed, frame), so permuting the class list permutes columns and
// rows identically.
AgmOutput mock_agm(std::size_t num_frames, const std::vector<std::string>& class_names,
                   std::uint64_t seed);

// Per-frame token embeddings tiled across the class axis (T x N x d).
// Preprocessing: mean over the 4 feature channels, per-frame standardization,
// GELU, then a seeded random projection from mel bins to the embed dim.
Tensor3 encode_tokens(const FeatureTensor& features, std::size_t num_classes,
                      std::size_t embed_dim, std::uint64_t seed);

// Optional learned query/key/value projections (d x d); identity when unset.
struct AttentionParams {
  std::optional<RealGrid> w_query;
  std::optional<RealGrid> w_key;
  std::optional<RealGrid> w_value;
};

// Single-head scaled dot-product attention with queries = tokens and
// keys/values = embedding rows. Output is T x N x d; every attention weight
// vector is nonnegative and sums to 1.
Tensor3 cross_attention(const Tensor3& tokens, const RealGrid& embeddings,
                        const AttentionParams& params = {});

// Concatenates tokens with the attention output along the feature axis and
// scales each (t, n) slice by probs(t, n). A zero probability produces an
// exactly-zero slice. Probabilities outside [0, 1] are a validation error.
Tensor3 fuse_and_gate(const Tensor3& tokens, const Tensor3& attended, const RealGrid& probs);

// Affine prediction heads over the class-averaged fused frame feature:
// tanh for the 2-component DoA vector, ReLU for the distance.
struct HeadParams {
  std::size_t tracks = 0;   // K
  std::size_t classes = 0;  // C
  RealGrid w_doa;           // (K*C*2) x feature_dim
  std::vector<double> b_doa;
  RealGrid w_dist;          // (K*C) x feature_dim
  std::vector<double> b_dist;
};

HeadParams zero_head_params(std::size_t tracks, std::size_t classes, std::size_t feature_dim);
HeadParams random_head_params(std::size_t tracks, std::size_t classes, std::size_t feature_dim,
                              std::uint64_t seed);

struct HeadOutputs {
  Tensor4 doa;   // T x K x C x 2, each component in [-1, 1]
  Tensor3 dist;  // T x K x C, nonnegative
};

HeadOutputs predict_heads(const Tensor3& fused, const HeadParams& params);

// Parameter-bundle adapters ("SAFZ" version 2 sections).
ParamBundle head_params_to_bundle(const HeadParams& params);
HeadParams head_params_from_bundle(const ParamBundle& bundle);

}  // namespace saqa
