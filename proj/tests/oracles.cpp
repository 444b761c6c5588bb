#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace oracle {

dvec to_dvec(const litetok::Tensor& t) {
    dvec out(t.data.size());
    for (size_t i = 0; i < t.data.size(); ++i) out[i] = t.data[i];
    return out;
}

dvec matmul_ref(const dvec& a, int64_t m, int64_t k, const dvec& b, int64_t n) {
    dvec out(static_cast<size_t>(m * n), 0.0);
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int64_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
            out[i * n + j] = acc;
        }
    return out;
}

dvec softmax_rows_ref(const dvec& x, int64_t rows, int64_t n) {
    dvec out(x.size());
    for (int64_t r = 0; r < rows; ++r) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int64_t i = 0; i < n; ++i) mx = std::max(mx, x[r * n + i]);
        double denom = 0.0;
        for (int64_t i = 0; i < n; ++i) denom += std::exp(x[r * n + i] - mx);
        for (int64_t i = 0; i < n; ++i) out[r * n + i] = std::exp(x[r * n + i] - mx) / denom;
    }
    return out;
}

dvec layernorm_ref(const dvec& x, int64_t rows, int64_t d, const dvec& gain, const dvec& bias) {
    dvec out(x.size());
    for (int64_t r = 0; r < rows; ++r) {
        double mean = 0.0;
        for (int64_t j = 0; j < d; ++j) mean += x[r * d + j];
        mean /= d;
        double var = 0.0;
        for (int64_t j = 0; j < d; ++j) var += (x[r * d + j] - mean) * (x[r * d + j] - mean);
        var /= d;
        double inv = 1.0 / std::sqrt(var + 1e-5);
        for (int64_t j = 0; j < d; ++j) out[r * d + j] = (x[r * d + j] - mean) * inv * gain[j] + bias[j];
    }
    return out;
}

double gelu_ref(double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); }

namespace {
int64_t reflect_ref(int64_t i, int64_t n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}
}  // namespace

dvec conv1d_ref(const dvec& x, int64_t seq, int64_t ch, const dvec& kernel, int64_t taps,
                int64_t stride, bool same) {
    int64_t out_seq = same ? seq : seq / stride;
    dvec out(static_cast<size_t>(out_seq * ch), 0.0);
    for (int64_t c = 0; c < ch; ++c)
        for (int64_t o = 0; o < out_seq; ++o) {
            double acc = 0.0;
            for (int64_t t = 0; t < taps; ++t) {
                int64_t src = reflect_ref(o * stride + t - taps / 2, seq);
                acc += kernel[t * ch + c] * x[src * ch + c];
            }
            out[o * ch + c] = acc;
        }
    return out;
}

MatmulGrads matmul_grads_ref(const dvec& a, int64_t m, int64_t k, const dvec& b, int64_t n,
                             const dvec& g) {
    MatmulGrads out;
    out.da.assign(static_cast<size_t>(m * k), 0.0);
    out.db.assign(static_cast<size_t>(k * n), 0.0);
    for (int64_t i = 0; i < m; ++i)
        for (int64_t p = 0; p < k; ++p)
            for (int64_t j = 0; j < n; ++j) {
                out.da[i * k + p] += g[i * n + j] * b[p * n + j];
                out.db[p * n + j] += a[i * k + p] * g[i * n + j];
            }
    return out;
}

dvec softmax_grads_ref(const dvec& y, int64_t rows, int64_t n, const dvec& g) {
    dvec dx(y.size(), 0.0);
    for (int64_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (int64_t i = 0; i < n; ++i) dot += g[r * n + i] * y[r * n + i];
        for (int64_t i = 0; i < n; ++i) dx[r * n + i] = y[r * n + i] * (g[r * n + i] - dot);
    }
    return dx;
}

LayerNormGrads layernorm_grads_ref(const dvec& x, int64_t rows, int64_t d, const dvec& gain,
                                   const dvec& g) {
    LayerNormGrads out;
    out.dx.assign(x.size(), 0.0);
    out.dgain.assign(static_cast<size_t>(d), 0.0);
    out.dbias.assign(static_cast<size_t>(d), 0.0);
    for (int64_t r = 0; r < rows; ++r) {
        double mean = 0.0;
        for (int64_t j = 0; j < d; ++j) mean += x[r * d + j];
        mean /= d;
        double var = 0.0;
        for (int64_t j = 0; j < d; ++j) var += (x[r * d + j] - mean) * (x[r * d + j] - mean);
        var /= d;
        double inv = 1.0 / std::sqrt(var + 1e-5);
        double mean_gg = 0.0, mean_ggxh = 0.0;
        for (int64_t j = 0; j < d; ++j) {
            double xh = (x[r * d + j] - mean) * inv;
            double gg = gain[j] * g[r * d + j];
            mean_gg += gg;
            mean_ggxh += gg * xh;
            out.dgain[j] += g[r * d + j] * xh;
            out.dbias[j] += g[r * d + j];
        }
        mean_gg /= d;
        mean_ggxh /= d;
        for (int64_t j = 0; j < d; ++j) {
            double xh = (x[r * d + j] - mean) * inv;
            double gg = gain[j] * g[r * d + j];
            out.dx[r * d + j] = inv * (gg - mean_gg - xh * mean_ggxh);
        }
    }
    return out;
}

dvec attention_block_ref(const dvec& x, int64_t n, int64_t d, int64_t heads,
                         const litetok::LayerParams& lp) {
    auto lin = [&](const dvec& in, const litetok::TensorPtr& w, const litetok::TensorPtr& b) {
        dvec out = matmul_ref(in, n, d, to_dvec(*w), d);
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < d; ++j) out[i * d + j] += b->data[j];
        return out;
    };
    dvec h = layernorm_ref(x, n, d, to_dvec(*lp.ln1_gain), to_dvec(*lp.ln1_bias));
    dvec q = lin(h, lp.wq, lp.bq), k = lin(h, lp.wk, lp.bk), v = lin(h, lp.wv, lp.bv);

    int64_t dh = d / heads;
    dvec o(static_cast<size_t>(n * d), 0.0);
    for (int64_t hd = 0; hd < heads; ++hd) {
        dvec scores(static_cast<size_t>(n * n), 0.0);
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int64_t p = 0; p < dh; ++p)
                    acc += q[i * d + hd * dh + p] * k[j * d + hd * dh + p];
                scores[i * n + j] = acc / std::sqrt(static_cast<double>(dh));
            }
        dvec attn = softmax_rows_ref(scores, n, n);
        for (int64_t i = 0; i < n; ++i)
            for (int64_t p = 0; p < dh; ++p) {
                double acc = 0.0;
                for (int64_t j = 0; j < n; ++j) acc += attn[i * n + j] * v[j * d + hd * dh + p];
                o[i * d + hd * dh + p] = acc;
            }
    }
    dvec proj = matmul_ref(o, n, d, to_dvec(*lp.wo), d);
    dvec x1(x.size());
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < d; ++j) x1[i * d + j] = x[i * d + j] + proj[i * d + j] + lp.bo->data[j];

    dvec h2 = layernorm_ref(x1, n, d, to_dvec(*lp.ln2_gain), to_dvec(*lp.ln2_bias));
    int64_t hidden = lp.mlp_w1->shape[1];
    dvec m = matmul_ref(h2, n, d, to_dvec(*lp.mlp_w1), hidden);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < hidden; ++j) m[i * hidden + j] = gelu_ref(m[i * hidden + j] + lp.mlp_b1->data[j]);
    dvec m2 = matmul_ref(m, n, hidden, to_dvec(*lp.mlp_w2), d);
    dvec out(x.size());
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < d; ++j) out[i * d + j] = x1[i * d + j] + m2[i * d + j] + lp.mlp_b2->data[j];
    return out;
}

dvec wap_ref(const dvec& tokens, const dvec& cls, int64_t T, int64_t H, int64_t W, int64_t C,
             int64_t t, int64_t h, int64_t w) {
    int64_t bt = T / t, bh = H / h, bw = W / w;
    dvec out(static_cast<size_t>(t * h * w * C), 0.0);
    for (int64_t u = 0; u < t; ++u)
        for (int64_t v = 0; v < h; ++v)
            for (int64_t s = 0; s < w; ++s) {
                // collect this block's logits
                dvec logits;
                for (int64_t dt = 0; dt < bt; ++dt)
                    for (int64_t di = 0; di < bh; ++di)
                        for (int64_t dj = 0; dj < bw; ++dj) {
                            int64_t tau = u * bt + dt, i = v * bh + di, j = s * bw + dj;
                            double dot = 0.0;
                            for (int64_t c = 0; c < C; ++c)
                                dot += cls[tau * C + c] * tokens[(((tau * H) + i) * W + j) * C + c];
                            logits.push_back(dot / std::sqrt(static_cast<double>(C)));
                        }
                double mx = -std::numeric_limits<double>::infinity();
                for (double l : logits) mx = std::max(mx, l);
                double denom = 0.0;
                for (double l : logits) denom += std::exp(l - mx);
                int64_t member = 0;
                for (int64_t dt = 0; dt < bt; ++dt)
                    for (int64_t di = 0; di < bh; ++di)
                        for (int64_t dj = 0; dj < bw; ++dj, ++member) {
                            int64_t tau = u * bt + dt, i = v * bh + di, j = s * bw + dj;
                            double wgt = std::exp(logits[member] - mx) / denom;
                            for (int64_t c = 0; c < C; ++c)
                                out[(((u * h) + v) * w + s) * C + c] +=
                                    wgt * tokens[(((tau * H) + i) * W + j) * C + c];
                        }
            }
    return out;
}

BestPair best_ab_cosine_pair_ref(const dvec& tokens, int64_t n, int64_t c) {
    auto cosine = [&](int64_t i, int64_t j) {
        double dot = 0.0, ni = 0.0, nj = 0.0;
        for (int64_t p = 0; p < c; ++p) {
            dot += tokens[i * c + p] * tokens[j * c + p];
            ni += tokens[i * c + p] * tokens[i * c + p];
            nj += tokens[j * c + p] * tokens[j * c + p];
        }
        if (ni < 1e-24 || nj < 1e-24) return 0.0;
        return dot / std::sqrt(ni * nj);
    };
    BestPair best{-1, -1, -std::numeric_limits<double>::infinity()};
    for (int64_t a = 0; a < n; a += 2)
        for (int64_t b = 1; b < n; b += 2) {
            double s = cosine(a, b);
            if (s > best.sim) best = {a, b, s};
        }
    return best;
}

double AdamScalarRef::update(double theta, double g, double lr, double wd) {
    step += 1;
    theta *= 1.0 - lr * wd;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    double mhat = m / (1.0 - std::pow(0.9, static_cast<double>(step)));
    double vhat = v / (1.0 - std::pow(0.999, static_cast<double>(step)));
    return theta - lr * mhat / (std::sqrt(vhat) + 1e-8);
}

double mse_ref(const dvec& a, const dvec& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

TinyStudentRefOut tiny_student_forward_ref(const litetok::Tensor& clip,
                                           const litetok::EncoderSpec& spec,
                                           const litetok::ModelParams& params) {
    int64_t T = clip.shape[0];
    int64_t g = spec.grid();
    int64_t d = spec.dim;
    int64_t pp = spec.patch;
    int64_t px = spec.input_px;
    int64_t pdim = pp * pp * 3;
    int64_t hw = g * g;

    // patch embedding + positional embedding
    dvec patches(static_cast<size_t>(T * hw * pdim));
    for (int64_t f = 0; f < T; ++f)
        for (int64_t gi = 0; gi < g; ++gi)
            for (int64_t gj = 0; gj < g; ++gj)
                for (int64_t pi = 0; pi < pp; ++pi)
                    for (int64_t pj = 0; pj < pp; ++pj)
                        for (int64_t c = 0; c < 3; ++c)
                            patches[(((f * g + gi) * g + gj) * pdim) + (pi * pp + pj) * 3 + c] =
                                clip.data[((f * px + gi * pp + pi) * px + gj * pp + pj) * 3 + c];
    dvec tokens = matmul_ref(patches, T * hw, pdim, to_dvec(*params.patch_weight), d);
    for (int64_t f = 0; f < T; ++f)
        for (int64_t p = 0; p < hw; ++p)
            for (int64_t c = 0; c < d; ++c)
                tokens[(f * hw + p) * d + c] +=
                    params.patch_bias->data[c] + params.pos_embed->data[p * d + c];
    dvec cls(static_cast<size_t>(T * d));
    for (int64_t f = 0; f < T; ++f)
        for (int64_t c = 0; c < d; ++c) cls[f * d + c] = params.cls_embed->data[c];

    for (int l = 0; l < spec.num_layers; ++l) {
        // per-frame attention over [cls ; patch tokens]
        for (int64_t f = 0; f < T; ++f) {
            dvec seq(static_cast<size_t>((hw + 1) * d));
            for (int64_t c = 0; c < d; ++c) seq[c] = cls[f * d + c];
            for (int64_t p = 0; p < hw; ++p)
                for (int64_t c = 0; c < d; ++c) seq[(p + 1) * d + c] = tokens[(f * hw + p) * d + c];
            dvec out = attention_block_ref(seq, hw + 1, d, spec.heads, params.layers[l]);
            for (int64_t c = 0; c < d; ++c) cls[f * d + c] = out[c];
            for (int64_t p = 0; p < hw; ++p)
                for (int64_t c = 0; c < d; ++c) tokens[(f * hw + p) * d + c] = out[(p + 1) * d + c];
        }
        // temporal depthwise conv across frames at every position, cls included
        if (spec.temporal_mixing && T > 1) {
            dvec kernel = to_dvec(*params.layers[l].temporal_kernel);
            int64_t taps = params.layers[l].temporal_kernel->shape[0];
            for (int64_t p = 0; p < hw; ++p) {
                dvec line(static_cast<size_t>(T * d));
                for (int64_t f = 0; f < T; ++f)
                    for (int64_t c = 0; c < d; ++c) line[f * d + c] = tokens[(f * hw + p) * d + c];
                dvec conv = conv1d_ref(line, T, d, kernel, taps, 1, true);
                for (int64_t f = 0; f < T; ++f)
                    for (int64_t c = 0; c < d; ++c) tokens[(f * hw + p) * d + c] = conv[f * d + c];
            }
            dvec conv = conv1d_ref(cls, T, d, kernel, taps, 1, true);
            cls = conv;
        }
    }

    TinyStudentRefOut out;
    out.distill = matmul_ref(tokens, T * hw, d, to_dvec(*params.distill_proj), spec.distill_proj_dim);
    return out;
}

}  // namespace oracle
