#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "core/ltf.hpp"
#include "core/ops.hpp"
#include "core/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace litetok;

namespace {

TensorPtr random_tensor(Rng& rng, std::vector<int64_t> shape, double scale = 1.0) {
    auto t = make_tensor(std::move(shape));
    for (auto& v : t->data) v = static_cast<float>(scale * (2.0 * rng.next_double() - 1.0));
    return t;
}

}  // namespace

TEST_CASE("matmul identity and literal") {
    auto eye = make_tensor({2, 2}, std::vector<float>{1, 0, 0, 1});
    auto a = make_tensor({2, 2}, std::vector<float>{1, 2, 3, 4});
    auto out = matmul(nullptr, eye, a);
    for (int i = 0; i < 4; ++i) CHECK(out->data[i] == a->data[i]);

    auto b = make_tensor({2, 2}, std::vector<float>{5, 6, 7, 8});
    auto ab = matmul(nullptr, a, b);
    CHECK(ab->data[0] == doctest::Approx(19));
    CHECK(ab->data[1] == doctest::Approx(22));
    CHECK(ab->data[2] == doctest::Approx(43));
    CHECK(ab->data[3] == doctest::Approx(50));
}

TEST_CASE("matmul shape contract") {
    auto a = make_tensor({2, 3});
    auto b = make_tensor({4, 2});
    CHECK_THROWS_AS(matmul(nullptr, a, b), DimensionError);
}

TEST_CASE("matmul matches triple-loop oracle on random inputs") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        int64_t m = rng.uniform_int(1, 6), k = rng.uniform_int(1, 6), n = rng.uniform_int(1, 6);
        auto a = random_tensor(rng, {m, k});
        auto b = random_tensor(rng, {k, n});
        auto out = matmul(nullptr, a, b);
        auto ref = oracle::matmul_ref(oracle::to_dvec(*a), m, k, oracle::to_dvec(*b), n);
        for (int64_t i = 0; i < m * n; ++i)
            CHECK(out->data[i] == doctest::Approx(ref[i]).epsilon(1e-5));
    }
}

TEST_CASE("matmul_nt equals matmul with explicit transpose") {
    Rng rng(11);
    auto a = random_tensor(rng, {3, 5});
    auto b = random_tensor(rng, {4, 5});
    auto bt = make_tensor({5, 4});
    for (int64_t i = 0; i < 4; ++i)
        for (int64_t j = 0; j < 5; ++j) bt->data[j * 4 + i] = b->data[i * 5 + j];
    auto nt = matmul_nt(nullptr, a, b);
    auto mm = matmul(nullptr, a, bt);
    for (int64_t i = 0; i < 12; ++i) CHECK(nt->data[i] == doctest::Approx(mm->data[i]).epsilon(1e-6));
}

TEST_CASE("softmax uniform logits") {
    auto x = make_tensor({4}, std::vector<float>{3.7f, 3.7f, 3.7f, 3.7f});
    auto y = softmax_last_axis(nullptr, x);
    for (int i = 0; i < 4; ++i) CHECK(y->data[i] == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("softmax analytically forced values") {
    auto x = make_tensor({2}, std::vector<float>{0.0f, std::log(3.0f)});
    auto y = softmax_last_axis(nullptr, x);
    CHECK(y->data[0] == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(y->data[1] == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("softmax shift invariance and normalization") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        int64_t rows = rng.uniform_int(1, 4), n = rng.uniform_int(1, 8);
        auto x = random_tensor(rng, {rows, n}, 5.0);
        auto shifted = make_tensor({rows, n});
        float c = static_cast<float>(rng.uniform(-10.0, 10.0));
        for (int64_t i = 0; i < x->numel(); ++i) shifted->data[i] = x->data[i] + c;
        auto y = softmax_last_axis(nullptr, x);
        auto ys = softmax_last_axis(nullptr, shifted);
        for (int64_t r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (int64_t i = 0; i < n; ++i) {
                sum += y->data[r * n + i];
                CHECK(std::fabs(y->data[r * n + i] - ys->data[r * n + i]) < 1e-6);
                CHECK(y->data[r * n + i] >= 0.0f);
            }
            CHECK(std::fabs(sum - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("softmax rejects NaN input") {
    auto x = make_tensor({2}, std::vector<float>{1.0f, std::nanf("")});
    CHECK_THROWS_AS(softmax_last_axis(nullptr, x), NumericError);
}

TEST_CASE("depthwise conv1d identity kernel") {
    Rng rng(5);
    auto x = random_tensor(rng, {6, 3});
    auto k = make_tensor({3, 3}, std::vector<float>{0, 0, 0, 1, 1, 1, 0, 0, 0});
    auto y = depthwise_conv1d(nullptr, x, k, 1, PaddingMode::Same);
    for (int64_t i = 0; i < x->numel(); ++i) CHECK(y->data[i] == x->data[i]);
}

TEST_CASE("depthwise conv1d preserves DC with unit-sum kernel") {
    auto x = make_tensor({5, 2}, 3.25f);
    auto k = make_tensor({3, 2}, std::vector<float>{0.2f, 0.5f, 0.5f, 0.25f, 0.3f, 0.25f});
    auto y = depthwise_conv1d(nullptr, x, k, 1, PaddingMode::Same);
    for (int64_t i = 0; i < y->numel(); ++i) CHECK(y->data[i] == doctest::Approx(3.25f).epsilon(1e-6));
}

TEST_CASE("depthwise conv1d strided literal and oracle") {
    // x=[1,2,3,4], kernel [1,1,1]/3, stride 2, reflective boundary:
    // out0 = (x[1]+x[0]+x[1])/3 = 5/3, out1 = (x[1]+x[2]+x[3])/3 = 3
    auto x = make_tensor({4, 1}, std::vector<float>{1, 2, 3, 4});
    auto k = make_tensor({3, 1}, std::vector<float>{1.f / 3, 1.f / 3, 1.f / 3});
    auto y = depthwise_conv1d(nullptr, x, k, 2, PaddingMode::ValidStrided);
    REQUIRE(y->shape[0] == 2);
    CHECK(y->data[0] == doctest::Approx(5.0 / 3.0).epsilon(1e-6));
    CHECK(y->data[1] == doctest::Approx(3.0).epsilon(1e-6));

    auto ref = oracle::conv1d_ref(oracle::to_dvec(*x), 4, 1, oracle::to_dvec(*k), 3, 2, false);
    CHECK(y->data[0] == doctest::Approx(ref[0]).epsilon(1e-6));
    CHECK(y->data[1] == doctest::Approx(ref[1]).epsilon(1e-6));
}

TEST_CASE("depthwise conv1d random inputs vs oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        int64_t ch = rng.uniform_int(1, 4);
        int64_t taps = 2 * rng.uniform_int(0, 2) + 1;
        bool strided = rng.uniform_int(0, 1) == 1;
        int64_t stride = strided ? 2 : 1;
        int64_t seq = strided ? 2 * rng.uniform_int(1, 5) : rng.uniform_int(1, 10);
        auto x = random_tensor(rng, {seq, ch});
        auto k = random_tensor(rng, {taps, ch});
        auto y = depthwise_conv1d(nullptr, x, k, stride,
                                  strided ? PaddingMode::ValidStrided : PaddingMode::Same);
        auto ref = oracle::conv1d_ref(oracle::to_dvec(*x), seq, ch, oracle::to_dvec(*k), taps, stride,
                                      !strided);
        REQUIRE(y->numel() == static_cast<int64_t>(ref.size()));
        for (int64_t i = 0; i < y->numel(); ++i)
            CHECK(y->data[i] == doctest::Approx(ref[i]).epsilon(1e-5));
    }
}

TEST_CASE("depthwise conv1d contract violations") {
    auto x = make_tensor({5, 2});
    auto k = make_tensor({3, 2});
    CHECK_THROWS_AS(depthwise_conv1d(nullptr, x, k, 2, PaddingMode::ValidStrided), DimensionError);
    auto keven = make_tensor({2, 2});
    CHECK_THROWS_AS(depthwise_conv1d(nullptr, x, keven, 1, PaddingMode::Same), DimensionError);
}

TEST_CASE("layer_norm zero-variance slice maps to zero") {
    auto x = make_tensor({2, 4}, 7.0f);
    auto gain = make_tensor({4}, 1.0f);
    auto bias = make_tensor({4}, 0.0f);
    auto y = layer_norm(nullptr, x, gain, bias);
    for (int64_t i = 0; i < y->numel(); ++i) CHECK(std::fabs(y->data[i]) < 1e-5);
}

TEST_CASE("layer_norm statistics and two-pass oracle") {
    Rng rng(23);
    auto x = random_tensor(rng, {5, 16}, 3.0);
    auto gain = make_tensor({16}, 1.0f);
    auto bias = make_tensor({16}, 0.0f);
    auto y = layer_norm(nullptr, x, gain, bias);
    for (int64_t r = 0; r < 5; ++r) {
        double mean = 0.0, var = 0.0;
        for (int64_t j = 0; j < 16; ++j) mean += y->data[r * 16 + j];
        mean /= 16;
        for (int64_t j = 0; j < 16; ++j) var += (y->data[r * 16 + j] - mean) * (y->data[r * 16 + j] - mean);
        var /= 16;
        CHECK(std::fabs(mean) < 1e-5);
        CHECK(std::fabs(var - 1.0) < 1e-4);
    }

    auto x123 = make_tensor({1, 3}, std::vector<float>{1, 2, 3});
    auto g3 = make_tensor({3}, 1.0f);
    auto b3 = make_tensor({3}, 0.0f);
    auto norm = layer_norm(nullptr, x123, g3, b3);
    auto ref = oracle::layernorm_ref({1, 2, 3}, 1, 3, {1, 1, 1}, {0, 0, 0});
    for (int i = 0; i < 3; ++i) CHECK(norm->data[i] == doctest::Approx(ref[i]).epsilon(1e-6));
    // the normalized extremes sit at -sqrt(1.5), +sqrt(1.5) up to epsilon
    CHECK(norm->data[0] == doctest::Approx(-std::sqrt(1.5)).epsilon(1e-4));
}

TEST_CASE("gelu matches reference on a range") {
    for (double v : {-3.0, -1.0, -0.1, 0.0, 0.5, 2.0}) {
        auto x = make_tensor({1, 1}, std::vector<float>{static_cast<float>(v)});
        auto y = gelu(nullptr, x);
        CHECK(y->data[0] == doctest::Approx(oracle::gelu_ref(v)).epsilon(1e-6));
    }
}

TEST_CASE("structural ops round trip") {
    Rng rng(31);
    auto x = random_tensor(rng, {6, 4});
    auto top = slice_rows(nullptr, x, 0, 2);
    auto rest = slice_rows(nullptr, x, 2, 4);
    auto back = concat_rows(nullptr, {top, rest});
    for (int64_t i = 0; i < x->numel(); ++i) CHECK(back->data[i] == x->data[i]);

    auto left = slice_cols(nullptr, x, 0, 1);
    auto right = slice_cols(nullptr, x, 1, 3);
    auto back2 = concat_cols(nullptr, {left, right});
    for (int64_t i = 0; i < x->numel(); ++i) CHECK(back2->data[i] == x->data[i]);

    auto gathered = gather_rows(nullptr, x, {5, 0, 3});
    for (int64_t j = 0; j < 4; ++j) {
        CHECK(gathered->data[0 * 4 + j] == x->data[5 * 4 + j]);
        CHECK(gathered->data[1 * 4 + j] == x->data[0 * 4 + j]);
        CHECK(gathered->data[2 * 4 + j] == x->data[3 * 4 + j]);
    }

    auto reshaped = reshape(nullptr, x, {2, 3, 4});
    CHECK(reshaped->shape == std::vector<int64_t>{2, 3, 4});
    CHECK_THROWS_AS(reshape(nullptr, x, {5, 5}), DimensionError);
}

TEST_CASE("clamp_sym saturates") {
    auto x = make_tensor({4}, std::vector<float>{-5, -0.5, 0.5, 5});
    auto y = clamp_sym(nullptr, x, 1.0);
    CHECK(y->data[0] == -1.0f);
    CHECK(y->data[1] == -0.5f);
    CHECK(y->data[2] == 0.5f);
    CHECK(y->data[3] == 1.0f);
}

TEST_CASE("LTF1 round trip is bit exact") {
    Rng rng(41);
    std::string path = "test_roundtrip.ltf";
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int64_t> shape;
        int64_t nd = rng.uniform_int(1, 4);
        for (int64_t i = 0; i < nd; ++i) shape.push_back(rng.uniform_int(1, 5));
        auto t = random_tensor(rng, shape, 100.0);
        ltf_write(path, *t);
        Tensor back = ltf_read(path);
        CHECK(back.shape == t->shape);
        for (int64_t i = 0; i < t->numel(); ++i) CHECK(back.data[i] == t->data[i]);
    }
    std::remove(path.c_str());
}

TEST_CASE("LTF1 rejects a non-LTF file") {
    std::string path = "test_bad.ltf";
    {
        std::ofstream os(path, std::ios::binary);
        os << "not a tensor";
    }
    CHECK_THROWS_AS(ltf_read(path), IoError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(ltf_read("does_not_exist.ltf"), IoError);
}

TEST_CASE("rng determinism and splitting") {
    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng parent(5);
    Rng c1 = parent.split(0);
    Rng c2 = parent.split(1);
    CHECK(c1.next_u64() != c2.next_u64());
    // splitting does not advance the parent
    Rng parent2(5);
    parent2.split(0);
    Rng fresh(5);
    CHECK(parent2.next_u64() == fresh.next_u64());
}
