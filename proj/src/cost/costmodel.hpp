#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "encoder/encoder.hpp"

namespace litetok {

using u128 = unsigned __int128;
std::string u128_to_string(u128 v);

// Analytic counting convention: 1 MAC = 2 FLOPs; layernorm, softmax, bias adds
// and patch embedding are excluded. Parameter counts cover attention, MLP,
// layernorm affines, positional/class embeddings and depthwise kernels; the
// patch projection is not derivable from these fields and is excluded.
enum class ArchFamily { FrameWiseVit, TempAttn, SpatioTempAttn, TempConv, DwTempConv };

struct ArchSpec {
    ArchFamily family = ArchFamily::FrameWiseVit;
    int layers = 12;
    int dim = 768;
    int heads = 12;
    int64_t tokens_per_frame = 1025;  // grid tokens + cls
    int mlp_ratio = 4;
    int temporal_kernel = 3;
    std::vector<StrideEntry> stride_schedule;

    void validate() const;
};

struct LLMSpec {
    int layers = 32;
    int dim = 4096;
    int mlp_ratio = 4;
    int kv_heads = 32;
    int query_heads = 32;

    void validate() const;
};

struct VitCost {
    u128 flops = 0;
    uint64_t params = 0;
};

VitCost vit_flops(const ArchSpec& spec, int64_t frames);

u128 llm_prefill_flops(const LLMSpec& spec, int64_t n_tokens);

enum class StrategyKind { None, PostHoc, Internal };

struct Strategy {
    StrategyKind kind = StrategyKind::None;
    int64_t r = 1;                         // compression ratio, PostHoc/Internal
    std::optional<ArchSpec> student;       // required for Internal
    std::string label() const;
};

struct CostReport {
    int64_t frames = 0;
    int64_t tokens_into_llm = 0;
    u128 flops_vision = 0;
    u128 flops_auxiliary = 0;
    u128 flops_llm_prefill = 0;
    u128 flops_total = 0;
    uint64_t params_vision = 0;
    std::string dominant;  // "vision" or "llm"
    std::optional<double> lat_vision_ms;
    std::optional<double> lat_total_ms;
};

// tokens_per_frame here is the LLM-side token count per frame (post projector).
CostReport bottleneck_report(const ArchSpec& vision, const LLMSpec& llm, const Strategy& strategy,
                             int64_t frames, int64_t tokens_per_frame);

struct WallclockResult {
    double median_ms = 0.0;
    std::vector<double> samples_ms;
};

// warmup iterations are discarded, then iters timed runs; median of the timed
// samples (mean of the middle two for even counts).
WallclockResult wallclock_profile(const std::function<void()>& component, int warmup = 40,
                                  int iters = 100);

}  // namespace litetok
