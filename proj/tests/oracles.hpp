#pragma once

// Independent reference implementations used as test oracles. Everything here
// is computed in double with straightforward loops and shares no code with the
// library paths it checks.

#include <cstdint>
#include <vector>

#include "encoder/encoder.hpp"

namespace oracle {

using dvec = std::vector<double>;

dvec to_dvec(const litetok::Tensor& t);

dvec matmul_ref(const dvec& a, int64_t m, int64_t k, const dvec& b, int64_t n);
dvec softmax_rows_ref(const dvec& x, int64_t rows, int64_t n);
dvec layernorm_ref(const dvec& x, int64_t rows, int64_t d, const dvec& gain, const dvec& bias);
double gelu_ref(double v);
// direct depthwise convolution with reflective boundary
dvec conv1d_ref(const dvec& x, int64_t seq, int64_t ch, const dvec& kernel, int64_t taps,
                int64_t stride, bool same);

// analytic gradients (all-double) for the three core ops, given upstream grad g
struct MatmulGrads { dvec da, db; };
MatmulGrads matmul_grads_ref(const dvec& a, int64_t m, int64_t k, const dvec& b, int64_t n,
                             const dvec& g);
dvec softmax_grads_ref(const dvec& y, int64_t rows, int64_t n, const dvec& g);
struct LayerNormGrads { dvec dx, dgain, dbias; };
LayerNormGrads layernorm_grads_ref(const dvec& x, int64_t rows, int64_t d, const dvec& gain,
                                   const dvec& g);

// whole pre-LN attention + MLP block, same parameterization as LayerParams
dvec attention_block_ref(const dvec& x, int64_t n, int64_t d, int64_t heads,
                         const litetok::LayerParams& lp);

// WAP direct formula: block-wise softmax of cls-token dot products over sqrt(C)
dvec wap_ref(const dvec& tokens, const dvec& cls, int64_t T, int64_t H, int64_t W, int64_t C,
             int64_t t, int64_t h, int64_t w);

// brute-force best cosine pair between even- and odd-indexed tokens
struct BestPair { int64_t a, b; double sim; };
BestPair best_ab_cosine_pair_ref(const dvec& tokens, int64_t n, int64_t c);

// scalar AdamW: decoupled decay then bias-corrected Adam
struct AdamScalarRef {
    double m = 0.0, v = 0.0;
    int64_t step = 0;
    double update(double theta, double g, double lr, double wd);
};

double mse_ref(const dvec& a, const dvec& b);

// full one-layer student forward in double: patch embed, attention block,
// temporal conv (same padding), distillation projection; no strides
struct TinyStudentRefOut {
    dvec distill;  // [(T*g*g) x D]
};
TinyStudentRefOut tiny_student_forward_ref(const litetok::Tensor& clip,
                                           const litetok::EncoderSpec& spec,
                                           const litetok::ModelParams& params);

}  // namespace oracle
