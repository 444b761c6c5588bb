#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "encoder/encoder.hpp"

namespace litetok {

enum class Objective { Ctd, Rtd };

struct TrainConfig {
    double peak_lr = 1e-3;
    int64_t warmup_steps = 50;
    int64_t total_steps = 300;
    int64_t batch_size = 8;
    double weight_decay = 0.01;
    double grad_clip_norm = 1.0;
    double outlier_sigma = 3.0;
    uint64_t seed = 123;
    Objective objective = Objective::Ctd;
    int64_t clip_frames = 4;
    double fps_min = 1.0;
    double fps_max = 4.0;

    void validate() const;
};

struct OptimizerState {
    // first/second moment buffers aligned with the owning parameter list
    std::vector<std::vector<float>> m;
    std::vector<std::vector<float>> v;
    int64_t step = 0;
};

OptimizerState make_optimizer_state(const std::vector<TensorPtr>& params);

// Decoupled weight decay (theta -= lr*wd*theta) then Adam with beta=(0.9,0.999),
// eps=1e-8 and bias correction. Throws NumericError on a non-finite gradient
// before touching any parameter.
void adamw_step(const std::vector<TensorPtr>& params, OptimizerState& state, double lr,
                double weight_decay);

// linear warmup 0 -> peak over warmup_steps, then cosine decay peak -> 0
double lr_schedule(int64_t step, const TrainConfig& cfg);

// Uniform-rate clip sampling: rate ~ U(fps_min, fps_max), start uniform over
// valid positions, frame i at start + round(i * native_fps / rate).
TensorPtr sample_clip(const TensorPtr& video, double native_fps, const TrainConfig& cfg, Rng& rng);

// CTD objective: residual against a fixed compressed target, clamped per batch
// item at outlier_sigma times the residual standard deviation (skipped when the
// deviation is zero), then mean of squares. Sigma is treated as a constant.
TensorPtr ctd_loss(Tape* tape, const TensorPtr& student_out, const TensorPtr& target,
                   double outlier_sigma);

struct DecoderParams {
    TensorPtr offset_embed;  // [block_volume x D]
    std::vector<LayerParams> blocks;

    std::vector<std::pair<std::string, TensorPtr>> named() const;
    void set_requires_grad(bool on);
};

DecoderParams init_decoder_params(int64_t block_volume, int64_t width, int64_t blocks, uint64_t seed);

// Nearest-neighbour unpooling to the dense layout plus a learned intra-block
// offset embedding, then transformer blocks over all N tokens.
TensorPtr rtd_decoder_forward(Tape* tape, const TensorPtr& student_out, const DecoderParams& dec,
                              const BlockPartition& part, int heads);

TensorPtr rtd_loss(Tape* tape, const TensorPtr& reconstruction, const TensorPtr& teacher_dense);

struct TrainLogRow {
    int64_t step;
    double lr;
    double loss;
    double grad_norm;  // post-clip global norm
};

struct TrainResult {
    std::vector<TrainLogRow> log;
    bool aborted = false;
    std::string abort_reason;
};

// Full distillation loop. The teacher is evaluated off-tape and never updated.
// Deterministic for a fixed cfg.seed. checkpoint_cb, when set, is invoked with
// the 1-based step count after the optimizer update.
TrainResult train(const EncoderSpec& teacher_spec, const ModelParams& teacher,
                  const EncoderSpec& student_spec, ModelParams& student, DecoderParams* decoder,
                  const std::vector<TensorPtr>& videos, double native_fps, const TrainConfig& cfg,
                  const std::function<void(int64_t)>& checkpoint_cb = {});

double global_grad_norm(const std::vector<TensorPtr>& params);
// scales gradients so the global norm is at most max_norm; returns the post-clip norm
double clip_grad_norm(const std::vector<TensorPtr>& params, double max_norm);

}  // namespace litetok
