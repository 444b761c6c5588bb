#include "cost/costmodel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace litetok {

std::string u128_to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

void ArchSpec::validate() const {
    if (layers < 1 || dim < 1 || heads < 1 || tokens_per_frame < 2 || mlp_ratio < 1)
        throw ConfigError("arch spec: extents must be positive (tokens_per_frame includes cls)");
    if (family == ArchFamily::FrameWiseVit && !stride_schedule.empty())
        throw ConfigError("arch spec: frame-wise family cannot carry a stride schedule");
    bool needs_kernel = family == ArchFamily::TempConv || family == ArchFamily::DwTempConv ||
                        !stride_schedule.empty();
    if (needs_kernel && (temporal_kernel < 1 || temporal_kernel % 2 == 0))
        throw ConfigError("arch spec: temporal_kernel must be odd and positive");
    int prev = 0;
    for (const auto& e : stride_schedule) {
        if (e.after_layer <= prev || e.after_layer >= layers)
            throw ConfigError("arch spec: stride schedule must be strictly increasing, before the last layer");
        if (e.st < 1 || e.sh < 1 || e.sw < 1) throw ConfigError("arch spec: strides must be positive");
        prev = e.after_layer;
    }
}

void LLMSpec::validate() const {
    if (layers < 1 || dim < 1 || mlp_ratio < 1 || kv_heads < 1 || query_heads < 1 ||
        kv_heads > query_heads)
        throw ConfigError("llm spec: bad extents");
}

namespace {

// attention + MLP MACs for one layer over an n-token attention scope
u128 attn_mlp_macs(u128 n, u128 d, int mlp_ratio) {
    return 4 * n * d * d + 2 * n * n * d + 2 * static_cast<u128>(mlp_ratio) * n * d * d;
}

}  // namespace

VitCost vit_flops(const ArchSpec& spec, int64_t frames) {
    spec.validate();
    if (frames < 1) throw ConfigError("vit_flops: frames must be positive");
    u128 d = static_cast<u128>(spec.dim);
    u128 k = static_cast<u128>(std::max(spec.temporal_kernel, 0));

    int64_t slices = frames;
    int64_t grid = spec.tokens_per_frame - 1;  // patch tokens per slice, cls excluded
    u128 macs = 0;
    uint64_t params = 0;

    // embeddings: positional + class
    params += static_cast<uint64_t>(spec.tokens_per_frame) * spec.dim;
    size_t stride_idx = 0;
    for (int l = 1; l <= spec.layers; ++l) {
        u128 per_slice = static_cast<u128>(grid) + 1;
        u128 joint = static_cast<u128>(slices) * per_slice;
        // spatial (or joint) attention + MLP
        if (spec.family == ArchFamily::SpatioTempAttn)
            macs += attn_mlp_macs(joint, d, spec.mlp_ratio);
        else
            macs += static_cast<u128>(slices) * attn_mlp_macs(per_slice, d, spec.mlp_ratio);
        params += 12ull * spec.dim * spec.dim + 13ull * spec.dim;

        // temporal mixing while more than one slice remains
        if (slices > 1) {
            switch (spec.family) {
                case ArchFamily::TempAttn:
                    macs += per_slice * (4 * static_cast<u128>(slices) * d * d +
                                         2 * static_cast<u128>(slices) * slices * d);
                    break;
                case ArchFamily::TempConv:
                    macs += joint * k * d * d;
                    break;
                case ArchFamily::DwTempConv:
                    macs += joint * k * d;
                    break;
                default:
                    break;
            }
        }
        switch (spec.family) {
            case ArchFamily::TempAttn:
                params += 4ull * spec.dim * spec.dim + 4ull * spec.dim;
                break;
            case ArchFamily::TempConv:
                params += static_cast<uint64_t>(spec.temporal_kernel) * spec.dim * spec.dim;
                break;
            case ArchFamily::DwTempConv:
                params += static_cast<uint64_t>(spec.temporal_kernel) * spec.dim;
                break;
            default:
                break;
        }

        while (stride_idx < spec.stride_schedule.size() &&
               spec.stride_schedule[stride_idx].after_layer == l) {
            const StrideEntry& e = spec.stride_schedule[stride_idx];
            if (slices % e.st != 0 || grid % (int64_t(e.sh) * e.sw) != 0)
                throw ConfigError("vit_flops: token schedule not integer after layer " + std::to_string(l));
            // depthwise strided convolutions, charged on their outputs
            if (e.st > 1) {
                slices /= e.st;
                macs += static_cast<u128>(slices) * (static_cast<u128>(grid) + 1) * k * d;
                params += static_cast<uint64_t>(spec.temporal_kernel) * spec.dim;
            }
            if (e.sh > 1) {
                grid /= e.sh;
                macs += static_cast<u128>(slices) * (static_cast<u128>(grid) + 1) * k * d;
                params += static_cast<uint64_t>(spec.temporal_kernel) * spec.dim;
            }
            if (e.sw > 1) {
                grid /= e.sw;
                macs += static_cast<u128>(slices) * (static_cast<u128>(grid) + 1) * k * d;
                params += static_cast<uint64_t>(spec.temporal_kernel) * spec.dim;
            }
            ++stride_idx;
        }
    }
    return {2 * macs, params};
}

u128 llm_prefill_flops(const LLMSpec& spec, int64_t n_tokens) {
    spec.validate();
    if (n_tokens < 1) throw ConfigError("llm_prefill_flops: need at least one token");
    if (spec.dim % spec.query_heads != 0)
        throw ConfigError("llm_prefill_flops: dim must be divisible by query_heads");
    u128 n = static_cast<u128>(n_tokens);
    u128 d = static_cast<u128>(spec.dim);
    // q and o projections at full width, k and v at the grouped kv width;
    // with kv_heads == query_heads the projections total 4*n*d^2
    u128 d_kv = static_cast<u128>(spec.dim / spec.query_heads) * static_cast<u128>(spec.kv_heads);
    u128 macs = 2 * n * d * d + 2 * n * d * d_kv;      // projections
    macs += 2 * n * n * d;                             // scores + weighted values
    macs += 2 * static_cast<u128>(spec.mlp_ratio) * n * d * d;  // MLP
    return 2 * macs * static_cast<u128>(spec.layers);
}

std::string Strategy::label() const {
    switch (kind) {
        case StrategyKind::None: return "none";
        case StrategyKind::PostHoc: return "posthoc(" + std::to_string(r) + ")";
        case StrategyKind::Internal: return "internal(" + std::to_string(r) + ")";
    }
    return "?";
}

CostReport bottleneck_report(const ArchSpec& vision, const LLMSpec& llm, const Strategy& strategy,
                             int64_t frames, int64_t tokens_per_frame) {
    if (strategy.r < 1) throw ConfigError("bottleneck_report: r must be >= 1");
    if (frames < 1 || tokens_per_frame < 1) throw ConfigError("bottleneck_report: bad token geometry");
    int64_t dense_tokens = frames * tokens_per_frame;

    CostReport rep;
    rep.frames = frames;
    switch (strategy.kind) {
        case StrategyKind::None: {
            rep.tokens_into_llm = dense_tokens;
            VitCost vc = vit_flops(vision, frames);
            rep.flops_vision = vc.flops;
            rep.params_vision = vc.params;
            rep.flops_auxiliary = 0;
            break;
        }
        case StrategyKind::PostHoc: {
            if (dense_tokens % strategy.r != 0)
                throw PartitionError("bottleneck_report: token count not divisible by r");
            rep.tokens_into_llm = dense_tokens / strategy.r;
            VitCost vc = vit_flops(vision, frames);
            rep.flops_vision = vc.flops;
            rep.params_vision = vc.params;
            // post-hoc pooling pass: one weight dot and one weighted add per dense token
            rep.flops_auxiliary =
                4 * static_cast<u128>(frames) * static_cast<u128>(vision.tokens_per_frame) *
                static_cast<u128>(vision.dim);
            break;
        }
        case StrategyKind::Internal: {
            if (!strategy.student)
                throw ConfigError("bottleneck_report: internal strategy needs a student spec");
            if (dense_tokens % strategy.r != 0)
                throw PartitionError("bottleneck_report: token count not divisible by r");
            rep.tokens_into_llm = dense_tokens / strategy.r;
            VitCost vc = vit_flops(*strategy.student, frames);
            rep.flops_vision = vc.flops;
            rep.params_vision = vc.params;
            rep.flops_auxiliary = 0;
            break;
        }
    }
    rep.flops_llm_prefill = llm_prefill_flops(llm, rep.tokens_into_llm);
    rep.flops_total = rep.flops_vision + rep.flops_auxiliary + rep.flops_llm_prefill;
    rep.dominant = rep.flops_vision > rep.flops_llm_prefill ? "vision" : "llm";
    return rep;
}

WallclockResult wallclock_profile(const std::function<void()>& component, int warmup, int iters) {
    if (iters < 1) throw ContractError("wallclock_profile: need at least one timed iteration");
    using clock = std::chrono::steady_clock;
    for (int i = 0; i < warmup; ++i) component();
    WallclockResult res;
    res.samples_ms.reserve(static_cast<size_t>(iters));
    for (int i = 0; i < iters; ++i) {
        auto t0 = clock::now();
        component();
        auto t1 = clock::now();
        res.samples_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::vector<double> sorted = res.samples_ms;
    std::sort(sorted.begin(), sorted.end());
    size_t n = sorted.size();
    res.median_ms = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return res;
}

}  // namespace litetok
