#include "compress/compress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace litetok {

void FeatureMap::validate() const {
    if (!tokens || !cls) throw DimensionError("FeatureMap: missing tensors");
    if (tokens->ndim() != 4)
        throw DimensionError("FeatureMap: tokens must be [TxHxWxC], got " + tokens->shape_str());
    if (cls->ndim() != 2 || cls->shape[0] != tokens->shape[0] || cls->shape[1] != tokens->shape[3])
        throw DimensionError("FeatureMap: cls " + cls->shape_str() + " does not match tokens " +
                             tokens->shape_str());
}

int64_t BlockPartition::block_of(int64_t tau, int64_t i, int64_t j) const {
    return ((tau / bt) * h + i / bh) * w + j / bw;
}

int64_t BlockPartition::offset_of(int64_t tau, int64_t i, int64_t j) const {
    return ((tau % bt) * bh + i % bh) * bw + j % bw;
}

BlockPartition partition_blocks(int64_t T, int64_t H, int64_t W, int64_t t, int64_t h, int64_t w) {
    if (T < 1 || H < 1 || W < 1 || t < 1 || h < 1 || w < 1)
        throw PartitionError("partition_blocks: extents must be positive");
    if (T % t != 0 || H % h != 0 || W % w != 0)
        throw PartitionError("partition_blocks: target (" + std::to_string(t) + "," + std::to_string(h) +
                             "," + std::to_string(w) + ") does not divide source (" + std::to_string(T) +
                             "," + std::to_string(H) + "," + std::to_string(W) + ")");
    BlockPartition p;
    p.T = T; p.H = H; p.W = W;
    p.t = t; p.h = h; p.w = w;
    p.bt = T / t; p.bh = H / h; p.bw = W / w;
    p.ratio = p.bt * p.bh * p.bw;
    return p;
}

namespace {

void check_fm_part(const FeatureMap& fm, const BlockPartition& part) {
    fm.validate();
    if (fm.frames() != part.T || fm.grid_h() != part.H || fm.grid_w() != part.W)
        throw DimensionError("feature map " + fm.tokens->shape_str() + " does not match partition source");
}

}  // namespace

TensorPtr wap_weights(const FeatureMap& fm, const BlockPartition& part) {
    check_fm_part(fm, part);
    int64_t T = part.T, H = part.H, W = part.W, C = fm.channels();
    double inv_sqrt_c = 1.0 / std::sqrt(static_cast<double>(C));

    // per-token logits
    std::vector<double> logits(static_cast<size_t>(T * H * W));
    for (int64_t tau = 0; tau < T; ++tau) {
        const float* cls = &fm.cls->data[tau * C];
        for (int64_t i = 0; i < H; ++i)
            for (int64_t j = 0; j < W; ++j) {
                const float* x = &fm.tokens->data[(((tau * H) + i) * W + j) * C];
                double dot = 0.0;
                for (int64_t c = 0; c < C; ++c) dot += double(cls[c]) * x[c];
                logits[(tau * H + i) * W + j] = dot * inv_sqrt_c;
            }
    }

    // block-wise softmax with max subtraction
    auto out = make_tensor({T, H, W});
    std::vector<double> bmax(static_cast<size_t>(part.num_blocks()),
                             -std::numeric_limits<double>::infinity());
    std::vector<double> bsum(static_cast<size_t>(part.num_blocks()), 0.0);
    for (int64_t tau = 0; tau < T; ++tau)
        for (int64_t i = 0; i < H; ++i)
            for (int64_t j = 0; j < W; ++j) {
                int64_t b = part.block_of(tau, i, j);
                bmax[b] = std::max(bmax[b], logits[(tau * H + i) * W + j]);
            }
    for (int64_t tau = 0; tau < T; ++tau)
        for (int64_t i = 0; i < H; ++i)
            for (int64_t j = 0; j < W; ++j) {
                int64_t b = part.block_of(tau, i, j);
                bsum[b] += std::exp(logits[(tau * H + i) * W + j] - bmax[b]);
            }
    for (int64_t tau = 0; tau < T; ++tau)
        for (int64_t i = 0; i < H; ++i)
            for (int64_t j = 0; j < W; ++j) {
                int64_t b = part.block_of(tau, i, j);
                out->data[(tau * H + i) * W + j] = static_cast<float>(
                    std::exp(logits[(tau * H + i) * W + j] - bmax[b]) / bsum[b]);
            }
    return out;
}

CompressedMap wap_compress(const FeatureMap& fm, const BlockPartition& part) {
    TensorPtr weights = wap_weights(fm, part);
    int64_t T = part.T, H = part.H, W = part.W, C = fm.channels();
    auto out = make_tensor({part.t, part.h, part.w, C});
    std::vector<double> acc(static_cast<size_t>(part.num_blocks() * C), 0.0);
    for (int64_t tau = 0; tau < T; ++tau)
        for (int64_t i = 0; i < H; ++i)
            for (int64_t j = 0; j < W; ++j) {
                int64_t b = part.block_of(tau, i, j);
                double wgt = weights->data[(tau * H + i) * W + j];
                const float* x = &fm.tokens->data[(((tau * H) + i) * W + j) * C];
                double* a = &acc[b * C];
                for (int64_t c = 0; c < C; ++c) a[c] += wgt * x[c];
            }
    for (int64_t b = 0; b < part.num_blocks(); ++b)
        for (int64_t c = 0; c < C; ++c) out->data[b * C + c] = static_cast<float>(acc[b * C + c]);
    return CompressedMap{out, "wap", part};
}

CompressedMap pool_compress(const FeatureMap& fm, const BlockPartition& part, PoolMode mode) {
    check_fm_part(fm, part);
    int64_t T = part.T, H = part.H, W = part.W, C = fm.channels();
    auto out = make_tensor({part.t, part.h, part.w, C});
    std::string name;
    switch (mode) {
        case PoolMode::Average: {
            name = "avg";
            std::vector<double> acc(static_cast<size_t>(part.num_blocks() * C), 0.0);
            for (int64_t tau = 0; tau < T; ++tau)
                for (int64_t i = 0; i < H; ++i)
                    for (int64_t j = 0; j < W; ++j) {
                        int64_t b = part.block_of(tau, i, j);
                        const float* x = &fm.tokens->data[(((tau * H) + i) * W + j) * C];
                        double* a = &acc[b * C];
                        for (int64_t c = 0; c < C; ++c) a[c] += x[c];
                    }
            double inv = 1.0 / static_cast<double>(part.block_volume());
            for (int64_t k = 0; k < part.num_blocks() * C; ++k)
                out->data[k] = static_cast<float>(acc[k] * inv);
            break;
        }
        case PoolMode::Max: {
            name = "max";
            std::fill(out->data.begin(), out->data.end(), -std::numeric_limits<float>::infinity());
            for (int64_t tau = 0; tau < T; ++tau)
                for (int64_t i = 0; i < H; ++i)
                    for (int64_t j = 0; j < W; ++j) {
                        int64_t b = part.block_of(tau, i, j);
                        const float* x = &fm.tokens->data[(((tau * H) + i) * W + j) * C];
                        float* o = &out->data[b * C];
                        for (int64_t c = 0; c < C; ++c) o[c] = std::max(o[c], x[c]);
                    }
            break;
        }
        case PoolMode::Subsample: {
            name = "sub";
            // the lexicographically first coordinate of block (u,v,s) is (u*bt, v*bh, s*bw)
            for (int64_t u = 0; u < part.t; ++u)
                for (int64_t v = 0; v < part.h; ++v)
                    for (int64_t s = 0; s < part.w; ++s) {
                        int64_t b = (u * part.h + v) * part.w + s;
                        const float* x =
                            &fm.tokens->data[(((u * part.bt * H) + v * part.bh) * W + s * part.bw) * C];
                        std::copy(x, x + C, &out->data[b * C]);
                    }
            break;
        }
    }
    return CompressedMap{out, name, part};
}

TensorPtr tome_merge(const TensorPtr& tokens, int64_t target_count) {
    if (!tokens || tokens->ndim() != 2)
        throw DimensionError("tome_merge: tokens must be [N x C]");
    int64_t N = tokens->shape[0], C = tokens->shape[1];
    if (target_count < 1 || target_count > N)
        throw ContractError("tome_merge: target_count " + std::to_string(target_count) +
                            " outside [1, " + std::to_string(N) + "]");

    // working set: (vector, member count) so repeated merges stay true means
    std::vector<std::vector<double>> vals(static_cast<size_t>(N), std::vector<double>(C));
    std::vector<int64_t> members(static_cast<size_t>(N), 1);
    for (int64_t i = 0; i < N; ++i)
        for (int64_t c = 0; c < C; ++c) vals[i][c] = tokens->data[i * C + c];

    auto cosine = [C](const std::vector<double>& a, const std::vector<double>& b) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (int64_t c = 0; c < C; ++c) {
            dot += a[c] * b[c];
            na += a[c] * a[c];
            nb += b[c] * b[c];
        }
        if (na < 1e-24 || nb < 1e-24) return 0.0;
        return dot / std::sqrt(na * nb);
    };

    while (static_cast<int64_t>(vals.size()) > target_count) {
        int64_t n = static_cast<int64_t>(vals.size());
        std::vector<int64_t> a_idx, b_idx;
        for (int64_t i = 0; i < n; ++i) (i % 2 == 0 ? a_idx : b_idx).push_back(i);
        if (b_idx.empty()) throw ContractError("tome_merge: cannot split a single token");

        struct Proposal { double sim; int64_t a; int64_t b; };
        std::vector<Proposal> proposals;
        proposals.reserve(a_idx.size());
        for (int64_t a : a_idx) {
            double best = -std::numeric_limits<double>::infinity();
            int64_t bestb = b_idx[0];
            for (int64_t b : b_idx) {
                double s = cosine(vals[a], vals[b]);
                if (s > best) {
                    best = s;
                    bestb = b;
                }
            }
            proposals.push_back({best, a, bestb});
        }
        std::stable_sort(proposals.begin(), proposals.end(), [](const Proposal& x, const Proposal& y) {
            if (x.sim != y.sim) return x.sim > y.sim;
            return x.a < y.a;
        });
        int64_t to_remove = std::min<int64_t>(static_cast<int64_t>(a_idx.size()),
                                              n - target_count);
        std::vector<bool> merged(static_cast<size_t>(n), false);
        for (int64_t k = 0; k < to_remove; ++k) {
            const Proposal& p = proposals[k];
            int64_t b = p.b;
            // merged token is the arithmetic mean over all absorbed members
            double wa = members[p.a], wb = members[b];
            for (int64_t c = 0; c < C; ++c)
                vals[b][c] = (vals[b][c] * wb + vals[p.a][c] * wa) / (wa + wb);
            members[b] += members[p.a];
            merged[p.a] = true;
        }
        std::vector<std::vector<double>> next_vals;
        std::vector<int64_t> next_members;
        next_vals.reserve(vals.size());
        for (int64_t i = 0; i < n; ++i) {
            if (merged[i]) continue;
            next_vals.push_back(std::move(vals[i]));
            next_members.push_back(members[i]);
        }
        vals = std::move(next_vals);
        members = std::move(next_members);
    }

    auto out = make_tensor({static_cast<int64_t>(vals.size()), C});
    for (size_t i = 0; i < vals.size(); ++i)
        for (int64_t c = 0; c < C; ++c) out->data[i * C + c] = static_cast<float>(vals[i][c]);
    return out;
}

std::vector<TensorPtr> tile_frames(const TensorPtr& frames, int64_t base) {
    if (!frames || frames->ndim() != 4 || frames->shape[3] != 3)
        throw DimensionError("tile_frames: frames must be [T x Hpx x Wpx x 3]");
    if (base < 1) throw ContractError("tile_frames: base must be positive");
    int64_t T = frames->shape[0], Hpx = frames->shape[1], Wpx = frames->shape[2];
    if (Hpx % base != 0 || Wpx % base != 0)
        throw PartitionError("tile_frames: resolution " + std::to_string(Hpx) + "x" + std::to_string(Wpx) +
                             " not divisible by tile base " + std::to_string(base));
    int64_t th = Hpx / base, tw = Wpx / base;
    std::vector<TensorPtr> tiles;
    tiles.reserve(static_cast<size_t>(th * tw));
    for (int64_t ti = 0; ti < th; ++ti)
        for (int64_t tj = 0; tj < tw; ++tj) {
            auto tile = make_tensor({T, base, base, 3});
            for (int64_t f = 0; f < T; ++f)
                for (int64_t y = 0; y < base; ++y) {
                    const float* src = &frames->data[((f * Hpx + ti * base + y) * Wpx + tj * base) * 3];
                    float* dst = &tile->data[((f * base + y) * base) * 3];
                    std::copy(src, src + base * 3, dst);
                }
            tiles.push_back(std::move(tile));
        }
    return tiles;
}

}  // namespace litetok
