#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "saqa/features.hpp"

namespace saqa {

// "SAFZ" container, little-endian throughout.
//
// Version 1 (feature tensor):
//   magic "SAFZ" | u16 version=1 | u32 dims[3] = {4, T, M} | f32 payload,
//   row-major in (channel, frame, mel) order.
//
// Version 2 (section-tagged parameter bundle):
//   magic "SAFZ" | u16 version=2 | u32 section_count | sections, each
//   u16 name_len | name bytes | u32 rank | u32 dims[rank] | f32 payload.

void write_feature_tensor(const std::string& path, const FeatureTensor& features);
FeatureTensor read_feature_tensor(const std::string& path);

struct NamedTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return dims.empty() ? 0 : n;
  }
};

// Ordered by name so serialization is byte-stable.
using ParamBundle = std::map<std::string, NamedTensor>;

void write_param_bundle(const std::string& path, const ParamBundle& bundle);
ParamBundle read_param_bundle(const std::string& path);

}  // namespace saqa
