#include "encoder/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/ltf.hpp"

namespace litetok {

void EncoderSpec::validate() const {
    if (num_layers < 1 || dim < 1 || heads < 1 || patch < 1 || input_px < 1)
        throw ConfigError("encoder spec: extents must be positive");
    if (dim % heads != 0) throw ConfigError("encoder spec: dim must be divisible by heads");
    if (input_px % patch != 0) throw ConfigError("encoder spec: patch must divide input_px");
    if (role == Role::Teacher) {
        if (!stride_schedule.empty()) throw ConfigError("teacher spec: stride schedule not allowed");
        if (temporal_mixing) throw ConfigError("teacher spec: temporal mixing not allowed");
        if (distill_proj_dim != 0) throw ConfigError("teacher spec: distillation projection not allowed");
    } else {
        if (temporal_kernel < 1 || temporal_kernel % 2 == 0)
            throw ConfigError("student spec: temporal_kernel must be odd and positive");
        if (distill_proj_dim < 1) throw ConfigError("student spec: distill_proj_dim required");
        int prev = 0;
        for (const auto& e : stride_schedule) {
            if (e.after_layer <= prev)
                throw ConfigError("student spec: stride schedule must be strictly increasing");
            if (e.after_layer >= num_layers)
                throw ConfigError("student spec: stride entries must come before the final layer");
            if (e.st < 1 || e.sh < 1 || e.sw < 1)
                throw ConfigError("student spec: strides must be positive");
            prev = e.after_layer;
        }
    }
}

int64_t EncoderSpec::compression_ratio() const {
    int64_t r = 1;
    for (const auto& e : stride_schedule) r *= e.volume();
    return r;
}

void EncoderSpec::output_extents(int64_t frames, int64_t* t, int64_t* h, int64_t* w) const {
    int64_t ct = frames, ch = grid(), cw = grid();
    for (const auto& e : stride_schedule) {
        if (ct % e.st != 0 || ch % e.sh != 0 || cw % e.sw != 0)
            throw DimensionError("clip extents (" + std::to_string(ct) + "," + std::to_string(ch) + "," +
                                 std::to_string(cw) + ") not divisible by stride entry after layer " +
                                 std::to_string(e.after_layer));
        ct /= e.st;
        ch /= e.sh;
        cw /= e.sw;
    }
    *t = ct;
    *h = ch;
    *w = cw;
}

namespace {

TensorPtr identity_tap_kernel(int taps, int dim) {
    auto k = make_tensor({taps, dim});
    for (int c = 0; c < dim; ++c) k->data[(taps / 2) * dim + c] = 1.0f;
    return k;
}

TensorPtr gaussian_tensor(Rng& rng, std::vector<int64_t> shape, double stddev) {
    auto t = make_tensor(std::move(shape));
    for (auto& v : t->data) v = static_cast<float>(stddev * rng.gaussian());
    return t;
}

}  // namespace

ModelParams init_params(const EncoderSpec& spec, uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    int d = spec.dim;
    ModelParams p;
    p.patch_weight = gaussian_tensor(rng, {int64_t(spec.patch) * spec.patch * 3, d},
                                     1.0 / std::sqrt(double(spec.patch) * spec.patch * 3));
    p.patch_bias = make_tensor({d});
    p.cls_embed = gaussian_tensor(rng, {d}, 0.02);
    p.pos_embed = gaussian_tensor(rng, {spec.tokens_per_frame(), d}, 0.02);
    double wstd = 1.0 / std::sqrt(double(d));
    for (int l = 0; l < spec.num_layers; ++l) {
        LayerParams lp;
        lp.ln1_gain = make_tensor({d}, 1.0f);
        lp.ln1_bias = make_tensor({d});
        lp.wq = gaussian_tensor(rng, {d, d}, wstd);
        lp.bq = make_tensor({d});
        lp.wk = gaussian_tensor(rng, {d, d}, wstd);
        lp.bk = make_tensor({d});
        lp.wv = gaussian_tensor(rng, {d, d}, wstd);
        lp.bv = make_tensor({d});
        lp.wo = gaussian_tensor(rng, {d, d}, wstd);
        lp.bo = make_tensor({d});
        lp.ln2_gain = make_tensor({d}, 1.0f);
        lp.ln2_bias = make_tensor({d});
        lp.mlp_w1 = gaussian_tensor(rng, {d, 4 * int64_t(d)}, wstd);
        lp.mlp_b1 = make_tensor({4 * int64_t(d)});
        lp.mlp_w2 = gaussian_tensor(rng, {4 * int64_t(d), d}, 1.0 / std::sqrt(4.0 * d));
        lp.mlp_b2 = make_tensor({d});
        if (spec.temporal_mixing) lp.temporal_kernel = identity_tap_kernel(spec.temporal_kernel, d);
        p.layers.push_back(std::move(lp));
    }
    for (const auto& e : spec.stride_schedule) {
        StrideParams sp;
        if (e.st > 1) sp.kt = identity_tap_kernel(spec.temporal_kernel, d);
        if (e.sh > 1) sp.kh = identity_tap_kernel(spec.temporal_kernel, d);
        if (e.sw > 1) sp.kw = identity_tap_kernel(spec.temporal_kernel, d);
        p.strides.push_back(std::move(sp));
    }
    if (spec.role == Role::Student)
        p.distill_proj = gaussian_tensor(rng, {d, spec.distill_proj_dim}, wstd);
    return p;
}

int64_t analytic_param_count(const EncoderSpec& spec) {
    int64_t d = spec.dim;
    int64_t n = int64_t(spec.patch) * spec.patch * 3 * d + d;  // patch embedding
    n += d;                                                    // class embedding
    n += spec.tokens_per_frame() * d;                          // positional embedding
    n += spec.num_layers * (12 * d * d + 13 * d);              // attention + LN + MLP per layer
    if (spec.temporal_mixing) n += int64_t(spec.num_layers) * spec.temporal_kernel * d;
    for (const auto& e : spec.stride_schedule) {
        if (e.st > 1) n += int64_t(spec.temporal_kernel) * d;
        if (e.sh > 1) n += int64_t(spec.temporal_kernel) * d;
        if (e.sw > 1) n += int64_t(spec.temporal_kernel) * d;
    }
    if (spec.role == Role::Student) n += d * spec.distill_proj_dim;
    return n;
}

std::vector<std::pair<std::string, TensorPtr>> ModelParams::named() const {
    std::vector<std::pair<std::string, TensorPtr>> out;
    out.emplace_back("patch_weight", patch_weight);
    out.emplace_back("patch_bias", patch_bias);
    out.emplace_back("cls_embed", cls_embed);
    out.emplace_back("pos_embed", pos_embed);
    for (size_t l = 0; l < layers.size(); ++l) {
        const auto& lp = layers[l];
        std::string base = "layer" + std::to_string(l) + ".";
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
        if (lp.temporal_kernel) out.emplace_back(base + "tkernel", lp.temporal_kernel);
    }
    for (size_t s = 0; s < strides.size(); ++s) {
        std::string base = "stride" + std::to_string(s) + ".";
        if (strides[s].kt) out.emplace_back(base + "kt", strides[s].kt);
        if (strides[s].kh) out.emplace_back(base + "kh", strides[s].kh);
        if (strides[s].kw) out.emplace_back(base + "kw", strides[s].kw);
    }
    if (distill_proj) out.emplace_back("distill_proj", distill_proj);
    return out;
}

void ModelParams::set_requires_grad(bool on) {
    for (auto& [name, t] : named()) t->requires_grad = on;
}

int64_t ModelParams::count() const {
    int64_t n = 0;
    for (const auto& [name, t] : named()) n += t->numel();
    return n;
}

namespace {

// leading-index slice of a teacher tensor onto a smaller shape
TensorPtr leading_slice(const TensorPtr& src, std::vector<int64_t> shape) {
    if (src->ndim() != static_cast<int64_t>(shape.size()))
        throw ConfigError("init_student_from_teacher: rank mismatch on slice");
    for (size_t i = 0; i < shape.size(); ++i)
        if (shape[i] > src->shape[i]) throw ConfigError("init_student_from_teacher: slice larger than source");
    auto out = make_tensor(shape);
    if (shape.size() == 1) {
        std::copy(src->data.begin(), src->data.begin() + shape[0], out->data.begin());
    } else {
        int64_t rows = shape[0], cols = shape[1], src_cols = src->shape[1];
        for (int64_t r = 0; r < rows; ++r)
            std::copy(&src->data[r * src_cols], &src->data[r * src_cols + cols], &out->data[r * cols]);
    }
    return out;
}

}  // namespace

ModelParams init_student_from_teacher(const EncoderSpec& teacher_spec, const ModelParams& teacher,
                                      const EncoderSpec& student_spec) {
    teacher_spec.validate();
    student_spec.validate();
    if (student_spec.role != Role::Student || teacher_spec.role != Role::Teacher)
        throw ConfigError("init_student_from_teacher: roles must be teacher -> student");
    if (student_spec.dim > teacher_spec.dim)
        throw ConfigError("init_student_from_teacher: student wider than teacher");
    if (student_spec.num_layers > teacher_spec.num_layers)
        throw ConfigError("init_student_from_teacher: student deeper than teacher");
    if (student_spec.patch != teacher_spec.patch || student_spec.input_px != teacher_spec.input_px)
        throw ConfigError("init_student_from_teacher: patch geometry must match");

    int64_t d = student_spec.dim;
    ModelParams p;
    p.patch_weight = leading_slice(teacher.patch_weight, {int64_t(student_spec.patch) * student_spec.patch * 3, d});
    p.patch_bias = leading_slice(teacher.patch_bias, {d});
    p.cls_embed = leading_slice(teacher.cls_embed, {d});
    p.pos_embed = leading_slice(teacher.pos_embed, {student_spec.tokens_per_frame(), d});
    for (int l = 0; l < student_spec.num_layers; ++l) {
        // even striding over the teacher's depth
        int sel = static_cast<int>(std::llround(double(l) * teacher_spec.num_layers / student_spec.num_layers));
        sel = std::min(sel, teacher_spec.num_layers - 1);
        const LayerParams& t = teacher.layers[sel];
        LayerParams lp;
        lp.ln1_gain = leading_slice(t.ln1_gain, {d});
        lp.ln1_bias = leading_slice(t.ln1_bias, {d});
        lp.wq = leading_slice(t.wq, {d, d});
        lp.bq = leading_slice(t.bq, {d});
        lp.wk = leading_slice(t.wk, {d, d});
        lp.bk = leading_slice(t.bk, {d});
        lp.wv = leading_slice(t.wv, {d, d});
        lp.bv = leading_slice(t.bv, {d});
        lp.wo = leading_slice(t.wo, {d, d});
        lp.bo = leading_slice(t.bo, {d});
        lp.ln2_gain = leading_slice(t.ln2_gain, {d});
        lp.ln2_bias = leading_slice(t.ln2_bias, {d});
        lp.mlp_w1 = leading_slice(t.mlp_w1, {d, 4 * d});
        lp.mlp_b1 = leading_slice(t.mlp_b1, {4 * d});
        lp.mlp_w2 = leading_slice(t.mlp_w2, {4 * d, d});
        lp.mlp_b2 = leading_slice(t.mlp_b2, {d});
        if (student_spec.temporal_mixing)
            lp.temporal_kernel = identity_tap_kernel(student_spec.temporal_kernel, d);
        p.layers.push_back(std::move(lp));
    }
    for (const auto& e : student_spec.stride_schedule) {
        StrideParams sp;
        if (e.st > 1) sp.kt = identity_tap_kernel(student_spec.temporal_kernel, d);
        if (e.sh > 1) sp.kh = identity_tap_kernel(student_spec.temporal_kernel, d);
        if (e.sw > 1) sp.kw = identity_tap_kernel(student_spec.temporal_kernel, d);
        p.strides.push_back(std::move(sp));
    }
    p.distill_proj = make_tensor({d, static_cast<int64_t>(student_spec.distill_proj_dim)});
    for (int64_t i = 0; i < std::min<int64_t>(d, student_spec.distill_proj_dim); ++i)
        p.distill_proj->data[i * student_spec.distill_proj_dim + i] = 1.0f;
    return p;
}

FeatureMap patch_embed(Tape* tape, const TensorPtr& clip, const EncoderSpec& spec,
                       const ModelParams& params) {
    if (!clip || clip->ndim() != 4 || clip->shape[3] != 3)
        throw DimensionError("patch_embed: clip must be [T x px x px x 3]");
    if (clip->shape[1] != spec.input_px || clip->shape[2] != spec.input_px)
        throw DimensionError("patch_embed: clip resolution " + clip->shape_str() + " does not match spec input_px " +
                             std::to_string(spec.input_px));
    int64_t T = clip->shape[0];
    int64_t g = spec.grid();
    int64_t px = spec.input_px, pp = spec.patch;
    int64_t pdim = pp * pp * 3;

    // flattened patches are plain input data, no gradient flows into the clip
    auto patches = make_tensor({T * g * g, pdim});
    for (int64_t f = 0; f < T; ++f)
        for (int64_t gi = 0; gi < g; ++gi)
            for (int64_t gj = 0; gj < g; ++gj) {
                float* dst = &patches->data[((f * g + gi) * g + gj) * pdim];
                for (int64_t pi = 0; pi < pp; ++pi) {
                    const float* src = &clip->data[((f * px + gi * pp + pi) * px + gj * pp) * 3];
                    std::copy(src, src + pp * 3, dst + pi * pp * 3);
                }
            }

    TensorPtr tokens = add_bias(tape, matmul(tape, patches, params.patch_weight), params.patch_bias);
    std::vector<TensorPtr> pos_tiles(static_cast<size_t>(T), params.pos_embed);
    tokens = add(tape, tokens, concat_rows(tape, pos_tiles));

    auto cls_row = reshape(tape, params.cls_embed, {1, int64_t(spec.dim)});
    std::vector<TensorPtr> cls_tiles(static_cast<size_t>(T), cls_row);
    TensorPtr cls = concat_rows(tape, cls_tiles);

    FeatureMap fm;
    fm.tokens = reshape(tape, tokens, {T, g, g, int64_t(spec.dim)});
    fm.cls = cls;
    return fm;
}

TensorPtr attention_mlp_block(Tape* tape, const TensorPtr& x, const LayerParams& lp, int heads) {
    int64_t d = x->cols();
    if (d % heads != 0) throw DimensionError("attention_mlp_block: dim not divisible by heads");
    int64_t dh = d / heads;

    TensorPtr h = layer_norm(tape, x, lp.ln1_gain, lp.ln1_bias);
    TensorPtr q = add_bias(tape, matmul(tape, h, lp.wq), lp.bq);
    TensorPtr k = add_bias(tape, matmul(tape, h, lp.wk), lp.bk);
    TensorPtr v = add_bias(tape, matmul(tape, h, lp.wv), lp.bv);

    std::vector<TensorPtr> head_outs;
    head_outs.reserve(static_cast<size_t>(heads));
    double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int i = 0; i < heads; ++i) {
        TensorPtr qi = slice_cols(tape, q, i * dh, dh);
        TensorPtr ki = slice_cols(tape, k, i * dh, dh);
        TensorPtr vi = slice_cols(tape, v, i * dh, dh);
        TensorPtr scores = scale(tape, matmul_nt(tape, qi, ki), inv_sqrt_dh);
        TensorPtr attn = softmax_last_axis(tape, scores);
        head_outs.push_back(matmul(tape, attn, vi));
    }
    TensorPtr o = concat_cols(tape, head_outs);
    o = add_bias(tape, matmul(tape, o, lp.wo), lp.bo);
    TensorPtr x1 = add(tape, x, o);

    TensorPtr h2 = layer_norm(tape, x1, lp.ln2_gain, lp.ln2_bias);
    TensorPtr m = gelu(tape, add_bias(tape, matmul(tape, h2, lp.mlp_w1), lp.mlp_b1));
    m = add_bias(tape, matmul(tape, m, lp.mlp_w2), lp.mlp_b2);
    return add(tape, x1, m);
}

namespace {

// one spatial layer over the 2D working layout: tokens [(T*H*W) x d], cls [T x d]
void spatial_layer(Tape* tape, TensorPtr& tokens, TensorPtr& cls, int64_t T, int64_t hw,
                   const LayerParams& lp, int heads) {
    std::vector<TensorPtr> new_tokens, new_cls;
    new_tokens.reserve(static_cast<size_t>(T));
    new_cls.reserve(static_cast<size_t>(T));
    for (int64_t f = 0; f < T; ++f) {
        TensorPtr seq = concat_rows(
            tape, {slice_rows(tape, cls, f, 1), slice_rows(tape, tokens, f * hw, hw)});
        TensorPtr out = attention_mlp_block(tape, seq, lp, heads);
        new_cls.push_back(slice_rows(tape, out, 0, 1));
        new_tokens.push_back(slice_rows(tape, out, 1, hw));
    }
    tokens = concat_rows(tape, new_tokens);
    cls = concat_rows(tape, new_cls);
}

}  // namespace

FeatureMap spatial_attention_block(Tape* tape, const FeatureMap& fm, const LayerParams& lp, int heads) {
    fm.validate();
    int64_t T = fm.frames(), H = fm.grid_h(), W = fm.grid_w(), C = fm.channels();
    TensorPtr tokens = reshape(tape, fm.tokens, {T * H * W, C});
    TensorPtr cls = fm.cls;
    spatial_layer(tape, tokens, cls, T, H * W, lp, heads);
    FeatureMap out;
    out.tokens = reshape(tape, tokens, {T, H, W, C});
    out.cls = cls;
    return out;
}

FeatureMap teacher_forward(Tape* tape, const TensorPtr& clip, const EncoderSpec& spec,
                           const ModelParams& params) {
    spec.validate();
    if (spec.role != Role::Teacher) throw ConfigError("teacher_forward: spec role is not teacher");
    if (static_cast<int>(params.layers.size()) != spec.num_layers)
        throw ConfigError("teacher_forward: params do not match spec layer count");
    FeatureMap fm = patch_embed(tape, clip, spec, params);
    int64_t T = fm.frames(), g = spec.grid();
    TensorPtr tokens = reshape(tape, fm.tokens, {T * g * g, int64_t(spec.dim)});
    TensorPtr cls = fm.cls;
    for (int l = 0; l < spec.num_layers; ++l)
        spatial_layer(tape, tokens, cls, T, g * g, params.layers[l], spec.heads);
    FeatureMap out;
    out.tokens = reshape(tape, tokens, {T, g, g, int64_t(spec.dim)});
    out.cls = cls;
    return out;
}

StudentOutput student_forward(Tape* tape, const TensorPtr& clip, const EncoderSpec& spec,
                              const ModelParams& params) {
    spec.validate();
    if (spec.role != Role::Student) throw ConfigError("student_forward: spec role is not student");
    if (static_cast<int>(params.layers.size()) != spec.num_layers ||
        params.strides.size() != spec.stride_schedule.size())
        throw ConfigError("student_forward: params do not match spec");
    int64_t T = clip->shape.empty() ? 0 : clip->shape[0];
    int64_t out_t, out_h, out_w;
    spec.output_extents(T, &out_t, &out_h, &out_w);  // divisibility check up front

    FeatureMap fm = patch_embed(tape, clip, spec, params);
    int64_t ct = T, chh = spec.grid(), cww = spec.grid();
    TensorPtr tokens = reshape(tape, fm.tokens, {ct * chh * cww, int64_t(spec.dim)});
    TensorPtr cls = fm.cls;

    size_t stride_idx = 0;
    for (int l = 1; l <= spec.num_layers; ++l) {
        spatial_layer(tape, tokens, cls, ct, chh * cww, params.layers[l - 1], spec.heads);
        if (spec.temporal_mixing && ct > 1) {
            tokens = depthwise_conv_grid(tape, tokens, ct, chh, cww, 0,
                                         params.layers[l - 1].temporal_kernel, 1, PaddingMode::Same);
            cls = depthwise_conv1d(tape, cls, params.layers[l - 1].temporal_kernel, 1, PaddingMode::Same);
        }
        while (stride_idx < spec.stride_schedule.size() &&
               spec.stride_schedule[stride_idx].after_layer == l) {
            const StrideEntry& e = spec.stride_schedule[stride_idx];
            const StrideParams& sp = params.strides[stride_idx];
            if (e.st > 1) {
                tokens = depthwise_conv_grid(tape, tokens, ct, chh, cww, 0, sp.kt, e.st,
                                             PaddingMode::ValidStrided);
                cls = depthwise_conv1d(tape, cls, sp.kt, e.st, PaddingMode::ValidStrided);
                ct /= e.st;
            }
            if (e.sh > 1) {
                tokens = depthwise_conv_grid(tape, tokens, ct, chh, cww, 1, sp.kh, e.sh,
                                             PaddingMode::ValidStrided);
                chh /= e.sh;
            }
            if (e.sw > 1) {
                tokens = depthwise_conv_grid(tape, tokens, ct, chh, cww, 2, sp.kw, e.sw,
                                             PaddingMode::ValidStrided);
                cww /= e.sw;
            }
            ++stride_idx;
        }
    }

    StudentOutput out;
    out.distill = matmul(tape, tokens, params.distill_proj);
    out.features.tokens = reshape(tape, tokens, {ct, chh, cww, int64_t(spec.dim)});
    out.features.method = "student";
    out.features.partition = partition_blocks(T, spec.grid(), spec.grid(), ct, chh, cww);
    out.cls = cls;
    return out;
}

std::string stride_schedule_to_string(const std::vector<StrideEntry>& sched) {
    if (sched.empty()) return "none";
    std::ostringstream os;
    for (size_t i = 0; i < sched.size(); ++i) {
        if (i) os << ",";
        os << sched[i].after_layer << ":" << sched[i].st << "x" << sched[i].sh << "x" << sched[i].sw;
    }
    return os.str();
}

std::vector<StrideEntry> parse_stride_schedule(const std::string& text) {
    std::vector<StrideEntry> out;
    if (text.empty() || text == "none") return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        StrideEntry e;
        char colon, x1, x2;
        std::istringstream is(item);
        if (!(is >> e.after_layer >> colon >> e.st >> x1 >> e.sh >> x2 >> e.sw) || colon != ':' ||
            x1 != 'x' || x2 != 'x')
            throw ConfigError("bad stride schedule entry: '" + item + "'");
        out.push_back(e);
    }
    return out;
}

std::string role_to_string(Role role) { return role == Role::Teacher ? "teacher" : "student"; }

Role role_from_string(const std::string& text) {
    if (text == "teacher") return Role::Teacher;
    if (text == "student") return Role::Student;
    throw ConfigError("unknown role '" + text + "'");
}

void save_checkpoint(const std::string& dir, const EncoderSpec& spec, const ModelParams& params) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream os(fs::path(dir) / "spec.cfg");
    if (!os) throw IoError("cannot write checkpoint manifest in " + dir);
    os << "role=" << role_to_string(spec.role) << "\n";
    os << "num_layers=" << spec.num_layers << "\n";
    os << "dim=" << spec.dim << "\n";
    os << "heads=" << spec.heads << "\n";
    os << "patch=" << spec.patch << "\n";
    os << "input_px=" << spec.input_px << "\n";
    os << "temporal_kernel=" << spec.temporal_kernel << "\n";
    os << "temporal_mixing=" << (spec.temporal_mixing ? 1 : 0) << "\n";
    os << "stride_schedule=" << stride_schedule_to_string(spec.stride_schedule) << "\n";
    os << "distill_proj_dim=" << spec.distill_proj_dim << "\n";
    for (const auto& [name, t] : params.named()) {
        std::string file = name + ".ltf";
        os << "param." << name << "=" << file << "\n";
        ltf_write((fs::path(dir) / file).string(), *t);
    }
    if (!os) throw IoError("write failed for checkpoint manifest in " + dir);
}

std::pair<EncoderSpec, ModelParams> load_checkpoint(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream is(fs::path(dir) / "spec.cfg");
    if (!is) throw IoError("cannot read checkpoint manifest in " + dir);
    std::map<std::string, std::string> kv;
    std::vector<std::pair<std::string, std::string>> files;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("bad manifest line: " + line);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key.rfind("param.", 0) == 0)
            files.emplace_back(key.substr(6), val);
        else
            kv[key] = val;
    }
    EncoderSpec spec;
    spec.role = role_from_string(kv.at("role"));
    spec.num_layers = std::stoi(kv.at("num_layers"));
    spec.dim = std::stoi(kv.at("dim"));
    spec.heads = std::stoi(kv.at("heads"));
    spec.patch = std::stoi(kv.at("patch"));
    spec.input_px = std::stoi(kv.at("input_px"));
    spec.temporal_kernel = std::stoi(kv.at("temporal_kernel"));
    spec.temporal_mixing = kv.at("temporal_mixing") == "1";
    spec.stride_schedule = parse_stride_schedule(kv.at("stride_schedule"));
    spec.distill_proj_dim = std::stoi(kv.at("distill_proj_dim"));
    spec.validate();

    ModelParams params = init_params(spec, 0);
    std::map<std::string, TensorPtr> by_name;
    for (auto& [name, t] : params.named()) by_name[name] = t;
    if (files.size() != by_name.size())
        throw IoError("checkpoint manifest lists " + std::to_string(files.size()) + " params, spec needs " +
                      std::to_string(by_name.size()));
    for (const auto& [name, file] : files) {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw IoError("unknown checkpoint parameter " + name);
        Tensor loaded = ltf_read((fs::path(dir) / file).string());
        if (loaded.shape != it->second->shape)
            throw IoError("checkpoint parameter " + name + " has shape " + loaded.shape_str() +
                          ", expected " + it->second->shape_str());
        it->second->data = std::move(loaded.data);
    }
    return {spec, std::move(params)};
}

EncoderSpec desk_teacher_spec() {
    EncoderSpec s;
    s.role = Role::Teacher;
    s.num_layers = 4;
    s.dim = 48;
    s.heads = 4;
    s.patch = 4;
    s.input_px = 32;
    s.temporal_kernel = 0;
    s.temporal_mixing = false;
    return s;
}

EncoderSpec desk_student_spec() {
    EncoderSpec s;
    s.role = Role::Student;
    s.num_layers = 6;
    s.dim = 32;
    s.heads = 4;
    s.patch = 4;
    s.input_px = 32;
    s.temporal_kernel = 3;
    s.temporal_mixing = true;
    s.stride_schedule = {{2, 2, 2, 2}, {4, 2, 1, 1}};
    s.distill_proj_dim = 48;
    return s;
}

}  // namespace litetok
