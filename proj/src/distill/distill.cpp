#include "distill/distill.hpp"

#include <cmath>

namespace litetok {

void TrainConfig::validate() const {
    if (total_steps < 0 || warmup_steps < 0 || warmup_steps > total_steps)
        throw ConfigError("train config: need 0 <= warmup_steps <= total_steps");
    if (batch_size < 1) throw ConfigError("train config: batch_size must be positive");
    if (peak_lr < 0 || weight_decay < 0 || grad_clip_norm <= 0)
        throw ConfigError("train config: negative rate or decay");
    if (clip_frames < 1) throw ConfigError("train config: clip_frames must be positive");
    if (fps_min <= 0 || fps_max < fps_min) throw ConfigError("train config: bad fps range");
}

OptimizerState make_optimizer_state(const std::vector<TensorPtr>& params) {
    OptimizerState st;
    st.m.reserve(params.size());
    st.v.reserve(params.size());
    for (const auto& p : params) {
        st.m.emplace_back(p->numel(), 0.0f);
        st.v.emplace_back(p->numel(), 0.0f);
    }
    return st;
}

void adamw_step(const std::vector<TensorPtr>& params, OptimizerState& state, double lr,
                double weight_decay) {
    if (params.size() != state.m.size()) throw ContractError("adamw_step: state does not match params");
    if (lr < 0) throw ContractError("adamw_step: negative learning rate");
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (size_t i = 0; i < params.size(); ++i) {
        const Tensor& p = *params[i];
        if (p.grad.size() != p.data.size())
            throw ContractError("adamw_step: missing gradient for a parameter");
        for (float g : p.grad)
            if (!std::isfinite(g)) throw NumericError("adamw_step: non-finite gradient");
    }
    state.step += 1;
    double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (size_t j = 0; j < p.data.size(); ++j) {
            double theta = p.data[j] * (1.0 - lr * weight_decay);  // decoupled decay first
            double g = p.grad[j];
            double mj = b1 * m[j] + (1.0 - b1) * g;
            double vj = b2 * v[j] + (1.0 - b2) * g * g;
            m[j] = static_cast<float>(mj);
            v[j] = static_cast<float>(vj);
            double mhat = mj / bc1;
            double vhat = vj / bc2;
            p.data[j] = static_cast<float>(theta - lr * mhat / (std::sqrt(vhat) + eps));
        }
    }
}

double lr_schedule(int64_t step, const TrainConfig& cfg) {
    if (step < 0 || step > cfg.total_steps) throw ContractError("lr_schedule: step out of range");
    if (cfg.warmup_steps > 0 && step <= cfg.warmup_steps)
        return cfg.peak_lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_steps);
    if (step >= cfg.total_steps) return 0.0;
    double progress = static_cast<double>(step - cfg.warmup_steps) /
                      static_cast<double>(cfg.total_steps - cfg.warmup_steps);
    return cfg.peak_lr * 0.5 * (1.0 + std::cos(M_PI * progress));
}

TensorPtr sample_clip(const TensorPtr& video, double native_fps, const TrainConfig& cfg, Rng& rng) {
    if (!video || video->ndim() != 4) throw DimensionError("sample_clip: video must be [F x px x px x 3]");
    int64_t F = video->shape[0];
    double rate = rng.uniform(cfg.fps_min, cfg.fps_max);
    double spacing = native_fps / rate;
    int64_t span = static_cast<int64_t>(std::llround(static_cast<double>(cfg.clip_frames - 1) * spacing));
    if (span > F - 1)
        throw SamplingError("sample_clip: video with " + std::to_string(F) +
                            " frames too short for rate " + std::to_string(rate));
    int64_t start = rng.uniform_int(0, F - 1 - span);
    int64_t px = video->shape[1];
    auto clip = make_tensor({cfg.clip_frames, px, video->shape[2], video->shape[3]});
    int64_t frame_elems = video->numel() / F;
    for (int64_t i = 0; i < cfg.clip_frames; ++i) {
        int64_t idx = start + static_cast<int64_t>(std::llround(static_cast<double>(i) * spacing));
        idx = std::min(idx, F - 1);
        std::copy(&video->data[idx * frame_elems], &video->data[(idx + 1) * frame_elems],
                  &clip->data[i * frame_elems]);
    }
    return clip;
}

TensorPtr ctd_loss(Tape* tape, const TensorPtr& student_out, const TensorPtr& target,
                   double outlier_sigma) {
    check_same_shape(*student_out, *target, "ctd_loss");
    TensorPtr diff = sub(tape, student_out, target);

    // per-item residual deviation, detached from the tape
    double mean = 0.0;
    for (float v : diff->data) mean += v;
    mean /= static_cast<double>(diff->numel());
    double var = 0.0;
    for (float v : diff->data) {
        double c = v - mean;
        var += c * c;
    }
    var /= static_cast<double>(diff->numel());
    double sigma = std::sqrt(var);

    TensorPtr clipped = diff;
    if (outlier_sigma > 0.0 && sigma > 0.0)
        clipped = clamp_sym(tape, diff, outlier_sigma * sigma);
    return mean_all(tape, mul(tape, clipped, clipped));
}

std::vector<std::pair<std::string, TensorPtr>> DecoderParams::named() const {
    std::vector<std::pair<std::string, TensorPtr>> out;
    out.emplace_back("decoder.offset_embed", offset_embed);
    for (size_t b = 0; b < blocks.size(); ++b) {
        const auto& lp = blocks[b];
        std::string base = "decoder.block" + std::to_string(b) + ".";
        out.emplace_back(base + "ln1_gain", lp.ln1_gain);
        out.emplace_back(base + "ln1_bias", lp.ln1_bias);
        out.emplace_back(base + "wq", lp.wq);
        out.emplace_back(base + "bq", lp.bq);
        out.emplace_back(base + "wk", lp.wk);
        out.emplace_back(base + "bk", lp.bk);
        out.emplace_back(base + "wv", lp.wv);
        out.emplace_back(base + "bv", lp.bv);
        out.emplace_back(base + "wo", lp.wo);
        out.emplace_back(base + "bo", lp.bo);
        out.emplace_back(base + "ln2_gain", lp.ln2_gain);
        out.emplace_back(base + "ln2_bias", lp.ln2_bias);
        out.emplace_back(base + "mlp_w1", lp.mlp_w1);
        out.emplace_back(base + "mlp_b1", lp.mlp_b1);
        out.emplace_back(base + "mlp_w2", lp.mlp_w2);
        out.emplace_back(base + "mlp_b2", lp.mlp_b2);
    }
    return out;
}

void DecoderParams::set_requires_grad(bool on) {
    for (auto& [name, t] : named()) t->requires_grad = on;
}

DecoderParams init_decoder_params(int64_t block_volume, int64_t width, int64_t blocks, uint64_t seed) {
    Rng rng(seed);
    DecoderParams dec;
    dec.offset_embed = make_tensor({block_volume, width});
    for (auto& v : dec.offset_embed->data) v = static_cast<float>(0.02 * rng.gaussian());
    double wstd = 1.0 / std::sqrt(static_cast<double>(width));
    for (int64_t b = 0; b < blocks; ++b) {
        LayerParams lp;
        lp.ln1_gain = make_tensor({width}, 1.0f);
        lp.ln1_bias = make_tensor({width});
        auto gauss = [&](std::vector<int64_t> shape, double stddev) {
            auto t = make_tensor(std::move(shape));
            for (auto& v : t->data) v = static_cast<float>(stddev * rng.gaussian());
            return t;
        };
        lp.wq = gauss({width, width}, wstd);
        lp.bq = make_tensor({width});
        lp.wk = gauss({width, width}, wstd);
        lp.bk = make_tensor({width});
        lp.wv = gauss({width, width}, wstd);
        lp.bv = make_tensor({width});
        lp.wo = gauss({width, width}, wstd);
        lp.bo = make_tensor({width});
        lp.ln2_gain = make_tensor({width}, 1.0f);
        lp.ln2_bias = make_tensor({width});
        lp.mlp_w1 = gauss({width, 4 * width}, wstd);
        lp.mlp_b1 = make_tensor({4 * width});
        lp.mlp_w2 = gauss({4 * width, width}, 1.0 / std::sqrt(4.0 * width));
        lp.mlp_b2 = make_tensor({width});
        dec.blocks.push_back(std::move(lp));
    }
    return dec;
}

TensorPtr rtd_decoder_forward(Tape* tape, const TensorPtr& student_out, const DecoderParams& dec,
                              const BlockPartition& part, int heads) {
    if (!student_out || student_out->ndim() != 2 || student_out->shape[0] != part.num_blocks())
        throw DimensionError("rtd_decoder_forward: student output does not match partition blocks");
    if (dec.offset_embed->shape[0] != part.block_volume() ||
        dec.offset_embed->shape[1] != student_out->shape[1])
        throw DimensionError("rtd_decoder_forward: offset embedding does not match partition/width");

    // dense row (tau,i,j) <- compressed block row + intra-block offset embedding
    int64_t N = part.T * part.H * part.W;
    std::vector<int64_t> block_idx(static_cast<size_t>(N));
    std::vector<int64_t> offset_idx(static_cast<size_t>(N));
    for (int64_t tau = 0; tau < part.T; ++tau)
        for (int64_t i = 0; i < part.H; ++i)
            for (int64_t j = 0; j < part.W; ++j) {
                int64_t row = (tau * part.H + i) * part.W + j;
                block_idx[row] = part.block_of(tau, i, j);
                offset_idx[row] = part.offset_of(tau, i, j);
            }
    TensorPtr x = gather_rows(tape, student_out, std::move(block_idx));
    TensorPtr off = gather_rows(tape, dec.offset_embed, std::move(offset_idx));
    x = add(tape, x, off);
    for (const auto& lp : dec.blocks) x = attention_mlp_block(tape, x, lp, heads);
    return x;
}

TensorPtr rtd_loss(Tape* tape, const TensorPtr& reconstruction, const TensorPtr& teacher_dense) {
    check_same_shape(*reconstruction, *teacher_dense, "rtd_loss");
    TensorPtr diff = sub(tape, reconstruction, teacher_dense);
    return mean_all(tape, mul(tape, diff, diff));
}

double global_grad_norm(const std::vector<TensorPtr>& params) {
    double acc = 0.0;
    for (const auto& p : params) {
        if (p->grad.empty()) continue;
        for (float g : p->grad) acc += double(g) * g;
    }
    return std::sqrt(acc);
}

double clip_grad_norm(const std::vector<TensorPtr>& params, double max_norm) {
    double norm = global_grad_norm(params);
    if (norm > max_norm && norm > 0.0) {
        double s = max_norm / norm;
        for (const auto& p : params)
            for (auto& g : p->grad) g = static_cast<float>(g * s);
    }
    return global_grad_norm(params);
}

TrainResult train(const EncoderSpec& teacher_spec, const ModelParams& teacher,
                  const EncoderSpec& student_spec, ModelParams& student, DecoderParams* decoder,
                  const std::vector<TensorPtr>& videos, double native_fps, const TrainConfig& cfg,
                  const std::function<void(int64_t)>& checkpoint_cb) {
    cfg.validate();
    teacher_spec.validate();
    student_spec.validate();
    if (videos.empty()) throw ConfigError("train: empty dataset");
    if (cfg.objective == Objective::Rtd && decoder == nullptr)
        throw ConfigError("train: RTD objective needs decoder parameters");
    if (student_spec.distill_proj_dim != teacher_spec.dim)
        throw ConfigError("train: student projection width must match teacher dim");

    std::vector<TensorPtr> opt_params;
    for (auto& [name, t] : student.named()) opt_params.push_back(t);
    if (cfg.objective == Objective::Rtd)
        for (auto& [name, t] : decoder->named()) opt_params.push_back(t);
    for (auto& p : opt_params) p->requires_grad = true;
    if (decoder && cfg.objective != Objective::Rtd) decoder->set_requires_grad(false);

    OptimizerState opt = make_optimizer_state(opt_params);
    Rng rng(cfg.seed);
    TrainResult result;

    for (int64_t step = 0; step < cfg.total_steps; ++step) {
        double lr = lr_schedule(step, cfg);
        Tape tape;
        std::vector<TensorPtr> item_losses;
        item_losses.reserve(static_cast<size_t>(cfg.batch_size));
        for (int64_t b = 0; b < cfg.batch_size; ++b) {
            int64_t vid = rng.uniform_int(0, static_cast<int64_t>(videos.size()) - 1);
            TensorPtr clip = sample_clip(videos[vid], native_fps, cfg, rng);

            FeatureMap dense = teacher_forward(nullptr, clip, teacher_spec, teacher);
            StudentOutput so = student_forward(&tape, clip, student_spec, student);
            const BlockPartition& part = so.features.partition;

            if (cfg.objective == Objective::Ctd) {
                CompressedMap target = wap_compress(dense, part);
                TensorPtr target_flat =
                    make_tensor({part.num_blocks(), int64_t(teacher_spec.dim)}, 0.0f);
                target_flat->data = target.tokens->data;
                item_losses.push_back(ctd_loss(&tape, so.distill, target_flat, cfg.outlier_sigma));
            } else {
                TensorPtr recon = rtd_decoder_forward(&tape, so.distill, *decoder, part,
                                                      student_spec.heads);
                TensorPtr dense_flat =
                    make_tensor({part.T * part.H * part.W, int64_t(teacher_spec.dim)}, 0.0f);
                dense_flat->data = dense.tokens->data;
                item_losses.push_back(rtd_loss(&tape, recon, dense_flat));
            }
        }
        TensorPtr loss = mean_scalars(&tape, item_losses);
        double loss_val = scalar_value(*loss);
        if (!std::isfinite(loss_val)) {
            result.aborted = true;
            result.abort_reason = "non-finite loss at step " + std::to_string(step);
            return result;
        }

        for (auto& p : opt_params) p->zero_grad();
        tape.backward(loss);
        double grad_norm = clip_grad_norm(opt_params, cfg.grad_clip_norm);
        adamw_step(opt_params, opt, lr, cfg.weight_decay);

        result.log.push_back({step, lr, loss_val, grad_norm});
        if (checkpoint_cb) checkpoint_cb(step + 1);
    }
    return result;
}

}  // namespace litetok
