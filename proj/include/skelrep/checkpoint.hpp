#pragma once

#include <string>
#include <vector>

#include "skelrep/tensor.hpp"

namespace skelrep {

struct NamedTensor {
    std::string name;
    Tensor value;
};

// Versioned binary checkpoint of named f32 tensors:
//   "SKCP" | version u16 | meta length u32 | meta (JSON, architecture plan)
//   | tensor count u32 | per tensor: name u16+bytes, ndim u8, dims u32, f32 data
//   | FNV-1a 64 checksum of everything before it
struct Checkpoint {
    std::string meta;  // architecture plan as JSON text
    std::vector<NamedTensor> tensors;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    const Tensor& find(const std::string& name) const;
    uint64_t content_checksum() const;  // over serialized bytes; used by the frozen-mode assert
};

}  // namespace skelrep
