#pragma once

#include <string>

#include "core/tensor.hpp"

namespace litetok {

// LTF1 binary tensor file: magic "LTF1", little-endian u32 ndim,
// u64 extents x ndim, then raw little-endian f32 data, row-major.
// No compression, no alignment padding.
void ltf_write(const std::string& path, const Tensor& t);
Tensor ltf_read(const std::string& path);
TensorPtr ltf_read_ptr(const std::string& path);

}  // namespace litetok
