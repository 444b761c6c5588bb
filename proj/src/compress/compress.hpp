#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace litetok {

// Dense spatio-temporal feature map: T frames of an HxW token grid with C
// channels, plus one class token per frame. The class tokens are weight
// queries only; they are never members of a compression block.
struct FeatureMap {
    TensorPtr tokens;  // [T x H x W x C]
    TensorPtr cls;     // [T x C]

    int64_t frames() const { return tokens->shape[0]; }
    int64_t grid_h() const { return tokens->shape[1]; }
    int64_t grid_w() const { return tokens->shape[2]; }
    int64_t channels() const { return tokens->shape[3]; }
    void validate() const;
};

// Non-overlapping block partition of a (T,H,W) token grid onto (t,h,w).
struct BlockPartition {
    int64_t T, H, W;     // source extents
    int64_t t, h, w;     // target extents
    int64_t bt, bh, bw;  // block extents T/t, H/h, W/w
    int64_t ratio;       // (T*H*W)/(t*h*w)

    int64_t num_blocks() const { return t * h * w; }
    int64_t block_volume() const { return bt * bh * bw; }
    // flat block index of a source coordinate
    int64_t block_of(int64_t tau, int64_t i, int64_t j) const;
    // row-major offset of a source coordinate inside its block
    int64_t offset_of(int64_t tau, int64_t i, int64_t j) const;
};

BlockPartition partition_blocks(int64_t T, int64_t H, int64_t W, int64_t t, int64_t h, int64_t w);

enum class PoolMode { Average, Max, Subsample };

struct CompressedMap {
    TensorPtr tokens;  // [t x h x w x C]
    std::string method;
    BlockPartition partition;
};

// Weighted average pooling: per block, tokens are combined with softmax
// weights of (cls_tau . x_tau,i,j) / sqrt(C), using the class token of each
// token's own frame. Class tokens do not appear in the output.
CompressedMap wap_compress(const FeatureMap& fm, const BlockPartition& part);

// Per-block softmax weights as a [T x H x W] tensor (each block sums to 1).
TensorPtr wap_weights(const FeatureMap& fm, const BlockPartition& part);

CompressedMap pool_compress(const FeatureMap& fm, const BlockPartition& part, PoolMode mode);

// Bipartite soft-matching merge on an unstructured token list. Rounds of
// even/odd splits; each even-set token proposes its most cosine-similar odd
// partner, the highest-similarity proposals merge by arithmetic mean into the
// partner's slot, until target_count tokens remain.
TensorPtr tome_merge(const TensorPtr& tokens, int64_t target_count);

// Splits [T x Hpx x Wpx x 3] frames into (Hpx/base)*(Wpx/base) tile clips of
// [T x base x base x 3], row-major tile order. Exact pixel partition.
std::vector<TensorPtr> tile_frames(const TensorPtr& frames, int64_t base);

}  // namespace litetok
