#pragma once

#include <string>
#include <utility>
#include <vector>

#include "compress/compress.hpp"
#include "core/ops.hpp"
#include "core/rng.hpp"

namespace litetok {

enum class Role { Teacher, Student };

// stride entry: applied after the given 1-based layer index
struct StrideEntry {
    int after_layer = 0;
    int st = 1, sh = 1, sw = 1;
    int64_t volume() const { return int64_t(st) * sh * sw; }
};

struct EncoderSpec {
    Role role = Role::Teacher;
    int num_layers = 4;
    int dim = 48;
    int heads = 4;
    int patch = 4;
    int input_px = 32;
    int temporal_kernel = 0;      // tap count for every depthwise kernel (odd; 0 only for teachers)
    bool temporal_mixing = false; // per-layer temporal convs while T > 1
    std::vector<StrideEntry> stride_schedule;
    int distill_proj_dim = 0;     // student: teacher feature width D

    void validate() const;
    int grid() const { return input_px / patch; }
    int64_t tokens_per_frame() const { return int64_t(grid()) * grid(); }
    int64_t compression_ratio() const;  // product of stride volumes
    // compressed output extents for a T-frame clip (divisibility enforced)
    void output_extents(int64_t frames, int64_t* t, int64_t* h, int64_t* w) const;
};

struct LayerParams {
    TensorPtr ln1_gain, ln1_bias;
    TensorPtr wq, bq, wk, bk, wv, bv, wo, bo;
    TensorPtr ln2_gain, ln2_bias;
    TensorPtr mlp_w1, mlp_b1, mlp_w2, mlp_b2;
    TensorPtr temporal_kernel;  // [k x dim], only when mixing is enabled
};

struct StrideParams {
    TensorPtr kt, kh, kw;  // [k x dim] per axis with stride > 1, else null
};

struct ModelParams {
    TensorPtr patch_weight;  // [patch*patch*3 x dim]
    TensorPtr patch_bias;    // [dim]
    TensorPtr cls_embed;     // [dim]
    TensorPtr pos_embed;     // [grid*grid x dim], shared across frames
    std::vector<LayerParams> layers;
    std::vector<StrideParams> strides;
    TensorPtr distill_proj;  // [dim x D]

    std::vector<std::pair<std::string, TensorPtr>> named() const;
    void set_requires_grad(bool on);
    int64_t count() const;
};

ModelParams init_params(const EncoderSpec& spec, uint64_t seed);
int64_t analytic_param_count(const EncoderSpec& spec);

// Student weights as leading-index slices of evenly strided teacher layers;
// depthwise kernels start as the identity tap, the distillation projection as
// a leading identity. Teacher must be at least as wide and deep.
ModelParams init_student_from_teacher(const EncoderSpec& teacher_spec, const ModelParams& teacher,
                                      const EncoderSpec& student_spec);

FeatureMap patch_embed(Tape* tape, const TensorPtr& clip, const EncoderSpec& spec,
                       const ModelParams& params);

// pre-LN multi-head attention + MLP over one token sequence [n x dim]
TensorPtr attention_mlp_block(Tape* tape, const TensorPtr& x, const LayerParams& lp, int heads);

// per-frame attention; frames never attend to each other
FeatureMap spatial_attention_block(Tape* tape, const FeatureMap& fm, const LayerParams& lp, int heads);

FeatureMap teacher_forward(Tape* tape, const TensorPtr& clip, const EncoderSpec& spec,
                           const ModelParams& params);

struct StudentOutput {
    CompressedMap features;  // [t x h x w x dim], student width
    TensorPtr cls;           // [t x dim], one class token per surviving slice
    TensorPtr distill;       // [(t*h*w) x D], projected to teacher width
};

StudentOutput student_forward(Tape* tape, const TensorPtr& clip, const EncoderSpec& spec,
                              const ModelParams& params);

// checkpoint directory: spec.cfg manifest + one LTF1 file per parameter
void save_checkpoint(const std::string& dir, const EncoderSpec& spec, const ModelParams& params);
std::pair<EncoderSpec, ModelParams> load_checkpoint(const std::string& dir);

std::string stride_schedule_to_string(const std::vector<StrideEntry>& sched);
std::vector<StrideEntry> parse_stride_schedule(const std::string& text);
std::string role_to_string(Role role);
Role role_from_string(const std::string& text);

EncoderSpec desk_teacher_spec();
EncoderSpec desk_student_spec();

}  // namespace litetok
