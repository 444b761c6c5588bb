#include "core/ops.hpp"

#include <array>
#include <cmath>
#include <cstring>

namespace litetok {

namespace {

bool wants_grad(Tape* tape, std::initializer_list<const TensorPtr*> inputs) {
    if (!tape) return false;
    for (const TensorPtr* p : inputs)
        if (*p && (*p)->requires_grad) return true;
    return false;
}

void require_2d(const Tensor& t, const char* op) {
    if (t.ndim() != 2) throw DimensionError(std::string(op) + ": expected 2D tensor, got " + t.shape_str());
}

bool is_scalar_shaped(const Tensor& t) { return t.numel() == 1; }

double in_value(const Tensor& t, int64_t i) {
    if (t.numel() == 1 && std::isfinite(t.scalar64)) return t.scalar64;
    return static_cast<double>(t.data[static_cast<size_t>(i)]);
}

}  // namespace

double scalar_value(const Tensor& t) {
    if (t.numel() != 1) throw ContractError("scalar_value: tensor has " + std::to_string(t.numel()) + " elements");
    return in_value(t, 0);
}

int64_t reflect_index(int64_t i, int64_t n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

TensorPtr add(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(*a, *b, "add");
    auto out = make_tensor(a->shape);
    for (int64_t i = 0; i < a->numel(); ++i) out->data[i] = a->data[i] + b->data[i];
    if (is_scalar_shaped(*out)) out->scalar64 = in_value(*a, 0) + in_value(*b, 0);
    if (wants_grad(tape, {&a, &b})) {
        out->requires_grad = true;
        tape->record([a, b, out] {
            if (out->grad.empty()) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (int64_t i = 0; i < a->numel(); ++i) a->grad[i] += out->grad[i];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (int64_t i = 0; i < b->numel(); ++i) b->grad[i] += out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr sub(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(*a, *b, "sub");
    auto out = make_tensor(a->shape);
    for (int64_t i = 0; i < a->numel(); ++i) out->data[i] = a->data[i] - b->data[i];
    if (is_scalar_shaped(*out)) out->scalar64 = in_value(*a, 0) - in_value(*b, 0);
    if (wants_grad(tape, {&a, &b})) {
        out->requires_grad = true;
        tape->record([a, b, out] {
            if (out->grad.empty()) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (int64_t i = 0; i < a->numel(); ++i) a->grad[i] += out->grad[i];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (int64_t i = 0; i < b->numel(); ++i) b->grad[i] -= out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr mul(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(*a, *b, "mul");
    auto out = make_tensor(a->shape);
    for (int64_t i = 0; i < a->numel(); ++i) out->data[i] = a->data[i] * b->data[i];
    if (is_scalar_shaped(*out)) out->scalar64 = in_value(*a, 0) * in_value(*b, 0);
    if (wants_grad(tape, {&a, &b})) {
        out->requires_grad = true;
        tape->record([a, b, out] {
            if (out->grad.empty()) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (int64_t i = 0; i < a->numel(); ++i) a->grad[i] += out->grad[i] * b->data[i];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (int64_t i = 0; i < b->numel(); ++i) b->grad[i] += out->grad[i] * a->data[i];
            }
        });
    }
    return out;
}

TensorPtr scale(Tape* tape, const TensorPtr& a, double s) {
    auto out = make_tensor(a->shape);
    for (int64_t i = 0; i < a->numel(); ++i) out->data[i] = static_cast<float>(s * a->data[i]);
    if (is_scalar_shaped(*out)) out->scalar64 = s * in_value(*a, 0);
    if (wants_grad(tape, {&a})) {
        out->requires_grad = true;
        tape->record([a, out, s] {
            if (out->grad.empty()) return;
            a->ensure_grad();
            for (int64_t i = 0; i < a->numel(); ++i)
                a->grad[i] += static_cast<float>(s * out->grad[i]);
        });
    }
    return out;
}

TensorPtr add_bias(Tape* tape, const TensorPtr& x, const TensorPtr& bias) {
    if (bias->ndim() != 1 || bias->shape[0] != x->cols())
        throw DimensionError("add_bias: bias " + bias->shape_str() + " does not match last axis of " + x->shape_str());
    int64_t rows = x->rows(), d = x->cols();
    auto out = make_tensor(x->shape);
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t j = 0; j < d; ++j) out->data[r * d + j] = x->data[r * d + j] + bias->data[j];
    if (wants_grad(tape, {&x, &bias})) {
        out->requires_grad = true;
        tape->record([x, bias, out, rows, d] {
            if (out->grad.empty()) return;
            if (x->requires_grad) {
                x->ensure_grad();
                for (int64_t i = 0; i < x->numel(); ++i) x->grad[i] += out->grad[i];
            }
            if (bias->requires_grad) {
                bias->ensure_grad();
                for (int64_t j = 0; j < d; ++j) {
                    double acc = 0.0;
                    for (int64_t r = 0; r < rows; ++r) acc += out->grad[r * d + j];
                    bias->grad[j] += static_cast<float>(acc);
                }
            }
        });
    }
    return out;
}

TensorPtr matmul(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    require_2d(*a, "matmul");
    require_2d(*b, "matmul");
    int64_t m = a->shape[0], k = a->shape[1], k2 = b->shape[0], n = b->shape[1];
    if (k != k2)
        throw DimensionError("matmul: inner extents disagree, " + a->shape_str() + " x " + b->shape_str());
    auto out = make_tensor({m, n});
    std::vector<double> acc(static_cast<size_t>(n));
    for (int64_t i = 0; i < m; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int64_t p = 0; p < k; ++p) {
            double av = a->data[i * k + p];
            const float* brow = &b->data[p * n];
            for (int64_t j = 0; j < n; ++j) acc[j] += av * brow[j];
        }
        for (int64_t j = 0; j < n; ++j) out->data[i * n + j] = static_cast<float>(acc[j]);
    }
    if (wants_grad(tape, {&a, &b})) {
        out->requires_grad = true;
        tape->record([a, b, out, m, k, n] {
            if (out->grad.empty()) return;
            const float* g = out->grad.data();
            if (a->requires_grad) {
                a->ensure_grad();
                for (int64_t i = 0; i < m; ++i)
                    for (int64_t p = 0; p < k; ++p) {
                        double acc = 0.0;
                        const float* brow = &b->data[p * n];
                        const float* grow = &g[i * n];
                        for (int64_t j = 0; j < n; ++j) acc += double(grow[j]) * brow[j];
                        a->grad[i * k + p] += static_cast<float>(acc);
                    }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (int64_t p = 0; p < k; ++p)
                    for (int64_t j = 0; j < n; ++j) {
                        double acc = 0.0;
                        for (int64_t i = 0; i < m; ++i) acc += double(a->data[i * k + p]) * g[i * n + j];
                        b->grad[p * n + j] += static_cast<float>(acc);
                    }
            }
        });
    }
    return out;
}

TensorPtr matmul_nt(Tape* tape, const TensorPtr& a, const TensorPtr& b) {
    require_2d(*a, "matmul_nt");
    require_2d(*b, "matmul_nt");
    int64_t m = a->shape[0], k = a->shape[1], n = b->shape[0];
    if (b->shape[1] != k)
        throw DimensionError("matmul_nt: inner extents disagree, " + a->shape_str() + " x " + b->shape_str() + "^T");
    auto out = make_tensor({m, n});
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) {
            double acc = 0.0;
            const float* arow = &a->data[i * k];
            const float* brow = &b->data[j * k];
            for (int64_t p = 0; p < k; ++p) acc += double(arow[p]) * brow[p];
            out->data[i * n + j] = static_cast<float>(acc);
        }
    if (wants_grad(tape, {&a, &b})) {
        out->requires_grad = true;
        tape->record([a, b, out, m, k, n] {
            if (out->grad.empty()) return;
            const float* g = out->grad.data();
            if (a->requires_grad) {
                a->ensure_grad();
                for (int64_t i = 0; i < m; ++i)
                    for (int64_t p = 0; p < k; ++p) {
                        double acc = 0.0;
                        for (int64_t j = 0; j < n; ++j) acc += double(g[i * n + j]) * b->data[j * k + p];
                        a->grad[i * k + p] += static_cast<float>(acc);
                    }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (int64_t j = 0; j < n; ++j)
                    for (int64_t p = 0; p < k; ++p) {
                        double acc = 0.0;
                        for (int64_t i = 0; i < m; ++i) acc += double(g[i * n + j]) * a->data[i * k + p];
                        b->grad[j * k + p] += static_cast<float>(acc);
                    }
            }
        });
    }
    return out;
}

TensorPtr softmax_last_axis(Tape* tape, const TensorPtr& x) {
    int64_t rows = x->rows(), n = x->cols();
    if (n < 1) throw DimensionError("softmax_last_axis: empty last axis");
    auto out = make_tensor(x->shape);
    for (int64_t r = 0; r < rows; ++r) {
        const float* xs = &x->data[r * n];
        float* ys = &out->data[r * n];
        double mx = -std::numeric_limits<double>::infinity();
        for (int64_t i = 0; i < n; ++i) {
            if (std::isnan(xs[i])) throw NumericError("softmax_last_axis: NaN in input");
            mx = std::max(mx, static_cast<double>(xs[i]));
        }
        double denom = 0.0;
        for (int64_t i = 0; i < n; ++i) denom += std::exp(double(xs[i]) - mx);
        for (int64_t i = 0; i < n; ++i)
            ys[i] = static_cast<float>(std::exp(double(xs[i]) - mx) / denom);
    }
    if (wants_grad(tape, {&x})) {
        out->requires_grad = true;
        tape->record([x, out, rows, n] {
            if (out->grad.empty()) return;
            x->ensure_grad();
            for (int64_t r = 0; r < rows; ++r) {
                const float* y = &out->data[r * n];
                const float* g = &out->grad[r * n];
                double dot = 0.0;
                for (int64_t i = 0; i < n; ++i) dot += double(g[i]) * y[i];
                for (int64_t i = 0; i < n; ++i)
                    x->grad[r * n + i] += static_cast<float>(double(y[i]) * (double(g[i]) - dot));
            }
        });
    }
    return out;
}

TensorPtr layer_norm(Tape* tape, const TensorPtr& x, const TensorPtr& gain, const TensorPtr& bias) {
    constexpr double kEps = 1e-5;
    int64_t rows = x->rows(), d = x->cols();
    if (d < 2) throw DimensionError("layer_norm: last axis must have extent >= 2");
    if (gain->ndim() != 1 || gain->shape[0] != d || bias->ndim() != 1 || bias->shape[0] != d)
        throw DimensionError("layer_norm: gain/bias must be 1D of extent " + std::to_string(d));
    auto out = make_tensor(x->shape);
    auto means = std::make_shared<std::vector<double>>(rows);
    auto invs = std::make_shared<std::vector<double>>(rows);
    for (int64_t r = 0; r < rows; ++r) {
        const float* xs = &x->data[r * d];
        double mean = 0.0;
        for (int64_t j = 0; j < d; ++j) mean += xs[j];
        mean /= d;
        double var = 0.0;
        for (int64_t j = 0; j < d; ++j) {
            double c = xs[j] - mean;
            var += c * c;
        }
        var /= d;
        double inv = 1.0 / std::sqrt(var + kEps);
        (*means)[r] = mean;
        (*invs)[r] = inv;
        for (int64_t j = 0; j < d; ++j)
            out->data[r * d + j] =
                static_cast<float>((xs[j] - mean) * inv * gain->data[j] + bias->data[j]);
    }
    if (wants_grad(tape, {&x, &gain, &bias})) {
        out->requires_grad = true;
        tape->record([x, gain, bias, out, means, invs, rows, d] {
            if (out->grad.empty()) return;
            std::vector<double> gg(static_cast<size_t>(d));
            for (int64_t r = 0; r < rows; ++r) {
                const float* xs = &x->data[r * d];
                const float* g = &out->grad[r * d];
                double mean = (*means)[r], inv = (*invs)[r];
                double mean_gg = 0.0, mean_ggxh = 0.0;
                for (int64_t j = 0; j < d; ++j) {
                    double xh = (xs[j] - mean) * inv;
                    gg[j] = double(gain->data[j]) * g[j];
                    mean_gg += gg[j];
                    mean_ggxh += gg[j] * xh;
                }
                mean_gg /= d;
                mean_ggxh /= d;
                if (x->requires_grad) {
                    x->ensure_grad();
                    for (int64_t j = 0; j < d; ++j) {
                        double xh = (xs[j] - mean) * inv;
                        x->grad[r * d + j] += static_cast<float>(inv * (gg[j] - mean_gg - xh * mean_ggxh));
                    }
                }
                if (gain->requires_grad) {
                    gain->ensure_grad();
                    for (int64_t j = 0; j < d; ++j)
                        gain->grad[j] += static_cast<float>(double(g[j]) * (xs[j] - mean) * inv);
                }
                if (bias->requires_grad) {
                    bias->ensure_grad();
                    for (int64_t j = 0; j < d; ++j) bias->grad[j] += g[j];
                }
            }
        });
    }
    return out;
}

TensorPtr gelu(Tape* tape, const TensorPtr& x) {
    auto out = make_tensor(x->shape);
    for (int64_t i = 0; i < x->numel(); ++i) {
        double v = x->data[i];
        out->data[i] = static_cast<float>(0.5 * v * (1.0 + std::erf(v * M_SQRT1_2)));
    }
    if (wants_grad(tape, {&x})) {
        out->requires_grad = true;
        tape->record([x, out] {
            if (out->grad.empty()) return;
            x->ensure_grad();
            constexpr double kInvSqrt2Pi = 0.3989422804014327;
            for (int64_t i = 0; i < x->numel(); ++i) {
                double v = x->data[i];
                double d = 0.5 * (1.0 + std::erf(v * M_SQRT1_2)) + v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
                x->grad[i] += static_cast<float>(d * out->grad[i]);
            }
        });
    }
    return out;
}

namespace {

void conv_line_fwd(const float* x, int64_t xstep, int64_t n_in, float* y, int64_t ystep,
                   int64_t n_out, const float* k, int64_t kstep, int64_t taps, int64_t stride) {
    int64_t half = taps / 2;
    for (int64_t o = 0; o < n_out; ++o) {
        double acc = 0.0;
        for (int64_t t = 0; t < taps; ++t) {
            int64_t src = reflect_index(o * stride + t - half, n_in);
            acc += double(k[t * kstep]) * x[src * xstep];
        }
        y[o * ystep] = static_cast<float>(acc);
    }
}

void conv_line_bwd(const float* x, float* gx, int64_t xstep, int64_t n_in, const float* gy,
                   int64_t ystep, int64_t n_out, const float* k, float* gk, int64_t kstep,
                   int64_t taps, int64_t stride) {
    int64_t half = taps / 2;
    for (int64_t o = 0; o < n_out; ++o) {
        double g = gy[o * ystep];
        for (int64_t t = 0; t < taps; ++t) {
            int64_t src = reflect_index(o * stride + t - half, n_in);
            if (gx) gx[src * xstep] += static_cast<float>(double(k[t * kstep]) * g);
            if (gk) gk[t * kstep] += static_cast<float>(double(x[src * xstep]) * g);
        }
    }
}

void check_conv_args(int64_t taps, int64_t ch, const Tensor& kernel, int64_t seq, int64_t stride,
                     PaddingMode mode, const char* op) {
    if (kernel.ndim() != 2 || kernel.shape[1] != ch)
        throw DimensionError(std::string(op) + ": kernel " + kernel.shape_str() + " must be [taps x " +
                             std::to_string(ch) + "]");
    if (taps < 1 || taps % 2 == 0)
        throw DimensionError(std::string(op) + ": kernel tap count must be odd, got " + std::to_string(taps));
    if (mode == PaddingMode::Same && stride != 1)
        throw DimensionError(std::string(op) + ": same-padding requires stride 1");
    if (mode == PaddingMode::ValidStrided) {
        if (stride < 2) throw DimensionError(std::string(op) + ": valid-strided requires stride >= 2");
        if (seq % stride != 0)
            throw DimensionError(std::string(op) + ": sequence length " + std::to_string(seq) +
                                 " not divisible by stride " + std::to_string(stride));
    }
}

}  // namespace

TensorPtr depthwise_conv1d(Tape* tape, const TensorPtr& x, const TensorPtr& kernel, int64_t stride,
                           PaddingMode mode) {
    require_2d(*x, "depthwise_conv1d");
    int64_t seq = x->shape[0], ch = x->shape[1];
    int64_t taps = kernel->shape.empty() ? 0 : kernel->shape[0];
    check_conv_args(taps, ch, *kernel, seq, stride, mode, "depthwise_conv1d");
    int64_t out_seq = (mode == PaddingMode::Same) ? seq : seq / stride;
    auto out = make_tensor({out_seq, ch});
    for (int64_t c = 0; c < ch; ++c)
        conv_line_fwd(&x->data[c], ch, seq, &out->data[c], ch, out_seq, &kernel->data[c], ch, taps, stride);
    if (wants_grad(tape, {&x, &kernel})) {
        out->requires_grad = true;
        tape->record([x, kernel, out, seq, ch, taps, stride, out_seq] {
            if (out->grad.empty()) return;
            if (x->requires_grad) x->ensure_grad();
            if (kernel->requires_grad) kernel->ensure_grad();
            for (int64_t c = 0; c < ch; ++c)
                conv_line_bwd(&x->data[c], x->requires_grad ? &x->grad[c] : nullptr, ch, seq,
                              &out->grad[c], ch, out_seq, &kernel->data[c],
                              kernel->requires_grad ? &kernel->grad[c] : nullptr, ch, taps, stride);
        });
    }
    return out;
}

TensorPtr depthwise_conv_grid(Tape* tape, const TensorPtr& x, int64_t T, int64_t H, int64_t W,
                              int axis, const TensorPtr& kernel, int64_t stride, PaddingMode mode) {
    require_2d(*x, "depthwise_conv_grid");
    if (x->shape[0] != T * H * W)
        throw DimensionError("depthwise_conv_grid: rows " + std::to_string(x->shape[0]) +
                             " do not match grid " + std::to_string(T * H * W));
    if (axis < 0 || axis > 2) throw ContractError("depthwise_conv_grid: axis must be 0, 1 or 2");
    int64_t ch = x->shape[1];
    int64_t ext[3] = {T, H, W};
    int64_t n_in = ext[axis];
    int64_t taps = kernel->shape.empty() ? 0 : kernel->shape[0];
    check_conv_args(taps, ch, *kernel, n_in, stride, mode, "depthwise_conv_grid");
    int64_t n_out = (mode == PaddingMode::Same) ? n_in : n_in / stride;
    int64_t out_ext[3] = {T, H, W};
    out_ext[axis] = n_out;
    auto out = make_tensor({out_ext[0] * out_ext[1] * out_ext[2], ch});

    // element strides (in floats) of each grid axis, input and output layouts
    std::array<int64_t, 3> extents = {T, H, W};
    std::array<int64_t, 3> in_step = {H * W * ch, W * ch, ch};
    std::array<int64_t, 3> out_step = {out_ext[1] * out_ext[2] * ch, out_ext[2] * ch, ch};
    int o1 = (axis == 0) ? 1 : 0;  // the two fixed axes
    int o2 = (axis == 2) ? 1 : 2;
    auto run = [x, kernel, out, extents, in_step, out_step, o1, o2, axis, ch, n_in, n_out, taps,
                stride](bool forward) {
        for (int64_t i1 = 0; i1 < extents[o1]; ++i1)
            for (int64_t i2 = 0; i2 < extents[o2]; ++i2)
                for (int64_t c = 0; c < ch; ++c) {
                    int64_t ibase = i1 * in_step[o1] + i2 * in_step[o2] + c;
                    int64_t obase = i1 * out_step[o1] + i2 * out_step[o2] + c;
                    if (forward)
                        conv_line_fwd(&x->data[ibase], in_step[axis], n_in, &out->data[obase],
                                      out_step[axis], n_out, &kernel->data[c], ch, taps, stride);
                    else
                        conv_line_bwd(&x->data[ibase], x->requires_grad ? &x->grad[ibase] : nullptr,
                                      in_step[axis], n_in, &out->grad[obase], out_step[axis], n_out,
                                      &kernel->data[c], kernel->requires_grad ? &kernel->grad[c] : nullptr,
                                      ch, taps, stride);
                }
    };
    run(true);
    if (wants_grad(tape, {&x, &kernel})) {
        out->requires_grad = true;
        tape->record([x, kernel, out, run] {
            if (out->grad.empty()) return;
            if (x->requires_grad) x->ensure_grad();
            if (kernel->requires_grad) kernel->ensure_grad();
            run(false);
        });
    }
    return out;
}

TensorPtr slice_rows(Tape* tape, const TensorPtr& x, int64_t row0, int64_t count) {
    require_2d(*x, "slice_rows");
    int64_t rows = x->shape[0], d = x->shape[1];
    if (row0 < 0 || count < 1 || row0 + count > rows)
        throw DimensionError("slice_rows: range [" + std::to_string(row0) + ", " +
                             std::to_string(row0 + count) + ") out of " + std::to_string(rows));
    auto out = make_tensor({count, d});
    std::memcpy(out->data.data(), &x->data[row0 * d], sizeof(float) * count * d);
    if (wants_grad(tape, {&x})) {
        out->requires_grad = true;
        tape->record([x, out, row0, d, count] {
            if (out->grad.empty()) return;
            x->ensure_grad();
            for (int64_t i = 0; i < count * d; ++i) x->grad[row0 * d + i] += out->grad[i];
        });
    }
    return out;
}

TensorPtr concat_rows(Tape* tape, const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: no inputs");
    int64_t d = parts[0]->cols(), total = 0;
    for (const auto& p : parts) {
        require_2d(*p, "concat_rows");
        if (p->shape[1] != d) throw DimensionError("concat_rows: column mismatch");
        total += p->shape[0];
    }
    auto out = make_tensor({total, d});
    int64_t at = 0;
    for (const auto& p : parts) {
        std::memcpy(&out->data[at * d], p->data.data(), sizeof(float) * p->numel());
        at += p->shape[0];
    }
    bool any = false;
    for (const auto& p : parts) any = any || p->requires_grad;
    if (tape && any) {
        out->requires_grad = true;
        tape->record([parts, out, d] {
            if (out->grad.empty()) return;
            int64_t at = 0;
            for (const auto& p : parts) {
                if (p->requires_grad) {
                    p->ensure_grad();
                    for (int64_t i = 0; i < p->numel(); ++i) p->grad[i] += out->grad[at * d + i];
                }
                at += p->shape[0];
            }
        });
    }
    return out;
}

TensorPtr slice_cols(Tape* tape, const TensorPtr& x, int64_t col0, int64_t count) {
    require_2d(*x, "slice_cols");
    int64_t rows = x->shape[0], d = x->shape[1];
    if (col0 < 0 || count < 1 || col0 + count > d)
        throw DimensionError("slice_cols: range out of " + std::to_string(d) + " columns");
    auto out = make_tensor({rows, count});
    for (int64_t r = 0; r < rows; ++r)
        std::memcpy(&out->data[r * count], &x->data[r * d + col0], sizeof(float) * count);
    if (wants_grad(tape, {&x})) {
        out->requires_grad = true;
        tape->record([x, out, col0, rows, d, count] {
            if (out->grad.empty()) return;
            x->ensure_grad();
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t j = 0; j < count; ++j) x->grad[r * d + col0 + j] += out->grad[r * count + j];
        });
    }
    return out;
}

TensorPtr concat_cols(Tape* tape, const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw ContractError("concat_cols: no inputs");
    int64_t rows = parts[0]->shape.empty() ? 0 : parts[0]->shape[0];
    int64_t total = 0;
    for (const auto& p : parts) {
        require_2d(*p, "concat_cols");
        if (p->shape[0] != rows) throw DimensionError("concat_cols: row mismatch");
        total += p->shape[1];
    }
    auto out = make_tensor({rows, total});
    int64_t at = 0;
    for (const auto& p : parts) {
        int64_t d = p->shape[1];
        for (int64_t r = 0; r < rows; ++r)
            std::memcpy(&out->data[r * total + at], &p->data[r * d], sizeof(float) * d);
        at += d;
    }
    bool any = false;
    for (const auto& p : parts) any = any || p->requires_grad;
    if (tape && any) {
        out->requires_grad = true;
        tape->record([parts, out, rows, total] {
            if (out->grad.empty()) return;
            int64_t at = 0;
            for (const auto& p : parts) {
                int64_t d = p->shape[1];
                if (p->requires_grad) {
                    p->ensure_grad();
                    for (int64_t r = 0; r < rows; ++r)
                        for (int64_t j = 0; j < d; ++j) p->grad[r * d + j] += out->grad[r * total + at + j];
                }
                at += d;
            }
        });
    }
    return out;
}

TensorPtr gather_rows(Tape* tape, const TensorPtr& x, std::vector<int64_t> idx) {
    require_2d(*x, "gather_rows");
    int64_t rows = x->shape[0], d = x->shape[1];
    for (int64_t i : idx)
        if (i < 0 || i >= rows) throw DimensionError("gather_rows: row index out of range");
    auto out = make_tensor({static_cast<int64_t>(idx.size()), d});
    for (size_t r = 0; r < idx.size(); ++r)
        std::memcpy(&out->data[r * d], &x->data[idx[r] * d], sizeof(float) * d);
    if (wants_grad(tape, {&x})) {
        out->requires_grad = true;
        auto ids = std::make_shared<std::vector<int64_t>>(std::move(idx));
        tape->record([x, out, ids, d] {
            if (out->grad.empty()) return;
            x->ensure_grad();
            for (size_t r = 0; r < ids->size(); ++r)
                for (int64_t j = 0; j < d; ++j) x->grad[(*ids)[r] * d + j] += out->grad[r * d + j];
        });
    }
    return out;
}

TensorPtr reshape(Tape* tape, const TensorPtr& x, std::vector<int64_t> shape) {
    if (shape_numel(shape) != x->numel())
        throw DimensionError("reshape: element count mismatch " + x->shape_str() + " -> " +
                             shape_to_string(shape));
    auto out = make_tensor(std::move(shape));
    out->data = x->data;
    out->scalar64 = x->scalar64;
    if (wants_grad(tape, {&x})) {
        out->requires_grad = true;
        tape->record([x, out] {
            if (out->grad.empty()) return;
            x->ensure_grad();
            for (int64_t i = 0; i < x->numel(); ++i) x->grad[i] += out->grad[i];
        });
    }
    return out;
}

TensorPtr sum_all(Tape* tape, const TensorPtr& x) {
    auto out = make_tensor({1});
    double acc = 0.0;
    if (x->numel() == 1) {
        acc = in_value(*x, 0);
    } else {
        for (float v : x->data) acc += v;
    }
    out->data[0] = static_cast<float>(acc);
    out->scalar64 = acc;
    if (wants_grad(tape, {&x})) {
        out->requires_grad = true;
        tape->record([x, out] {
            if (out->grad.empty()) return;
            x->ensure_grad();
            float g = out->grad[0];
            for (int64_t i = 0; i < x->numel(); ++i) x->grad[i] += g;
        });
    }
    return out;
}

TensorPtr mean_all(Tape* tape, const TensorPtr& x) {
    auto out = make_tensor({1});
    double acc = 0.0;
    if (x->numel() == 1) {
        acc = in_value(*x, 0);
    } else {
        for (float v : x->data) acc += v;
        acc /= static_cast<double>(x->numel());
    }
    out->data[0] = static_cast<float>(acc);
    out->scalar64 = acc;
    if (wants_grad(tape, {&x})) {
        out->requires_grad = true;
        tape->record([x, out] {
            if (out->grad.empty()) return;
            x->ensure_grad();
            double g = double(out->grad[0]) / x->numel();
            for (int64_t i = 0; i < x->numel(); ++i) x->grad[i] += static_cast<float>(g);
        });
    }
    return out;
}

TensorPtr mean_scalars(Tape* tape, const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw ContractError("mean_scalars: no inputs");
    double acc = 0.0;
    for (const auto& p : parts) acc += scalar_value(*p);
    acc /= static_cast<double>(parts.size());
    auto out = make_tensor({1});
    out->data[0] = static_cast<float>(acc);
    out->scalar64 = acc;
    bool any = false;
    for (const auto& p : parts) any = any || p->requires_grad;
    if (tape && any) {
        out->requires_grad = true;
        size_t n = parts.size();
        tape->record([parts, out, n] {
            if (out->grad.empty()) return;
            float g = static_cast<float>(double(out->grad[0]) / double(n));
            for (const auto& p : parts) {
                if (!p->requires_grad) continue;
                p->ensure_grad();
                p->grad[0] += g;
            }
        });
    }
    return out;
}

TensorPtr clamp_sym(Tape* tape, const TensorPtr& x, double limit) {
    if (limit < 0.0) throw ContractError("clamp_sym: negative limit");
    auto out = make_tensor(x->shape);
    float lim = static_cast<float>(limit);
    for (int64_t i = 0; i < x->numel(); ++i)
        out->data[i] = std::min(std::max(x->data[i], -lim), lim);
    if (is_scalar_shaped(*out)) out->scalar64 = std::min(std::max(in_value(*x, 0), -limit), limit);
    if (wants_grad(tape, {&x})) {
        out->requires_grad = true;
        tape->record([x, out, lim] {
            if (out->grad.empty()) return;
            x->ensure_grad();
            for (int64_t i = 0; i < x->numel(); ++i)
                if (std::fabs(x->data[i]) <= lim) x->grad[i] += out->grad[i];
        });
    }
    return out;
}

}  // namespace litetok
