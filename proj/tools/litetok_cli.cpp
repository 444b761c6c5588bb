// litetok command-line front end. Talks to the core exclusively through the
// C API in litetok/litetok.h.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "litetok/litetok.h"

namespace {

int exit_code_for(ltk_status status) {
    switch (status) {
        case LTK_OK: return 0;
        case LTK_ERR_CONFIG:
        case LTK_ERR_IO:
        case LTK_ERR_DIMENSION: return 2;
        case LTK_ERR_NUMERIC: return 3;
        case LTK_ERR_PARTITION: return 4;
        case LTK_ERR_CONTRACT: return 1;
    }
    return 1;
}

int fail(ltk_status status) {
    std::fprintf(stderr, "litetok: %s\n", ltk_last_error());
    return exit_code_for(status);
}

struct TensorGuard {
    ltk_tensor* t = nullptr;
    ~TensorGuard() { ltk_tensor_free(t); }
};

bool parse_target(const std::string& text, int64_t* t, int64_t* h, int64_t* w) {
    return std::sscanf(text.c_str(), "%ld,%ld,%ld", t, h, w) == 3;
}

int cmd_compress(const std::string& method, const std::string& target, const std::string& tokens_path,
                 const std::string& cls_path, const std::string& out_path) {
    int64_t t, h, w;
    if (!parse_target(target, &t, &h, &w)) {
        std::fprintf(stderr, "litetok: --target must be t,h,w\n");
        return 2;
    }
    TensorGuard tokens, cls, out;
    if (ltk_status s = ltk_tensor_load(tokens_path.c_str(), &tokens.t); s != LTK_OK) return fail(s);
    if (ltk_status s = ltk_tensor_load(cls_path.c_str(), &cls.t); s != LTK_OK) return fail(s);
    if (ltk_tensor_ndim(tokens.t) != 4) {
        std::fprintf(stderr, "litetok: tokens file must hold a [TxHxWxC] tensor\n");
        return 2;
    }
    int64_t T = ltk_tensor_extent(tokens.t, 0);
    int64_t H = ltk_tensor_extent(tokens.t, 1);
    int64_t W = ltk_tensor_extent(tokens.t, 2);
    int64_t C = ltk_tensor_extent(tokens.t, 3);

    if (method == "tome") {
        if (ltk_tensor_ndim(cls.t) != 2 || ltk_tensor_extent(cls.t, 0) != T ||
            ltk_tensor_extent(cls.t, 1) != C) {
            std::fprintf(stderr, "litetok: cls file must hold a [TxC] tensor\n");
            return 2;
        }
        int64_t target_count = t * h * w;
        if (target_count < 1 || (T * H * W) % target_count != 0) {
            std::fprintf(stderr, "litetok: tome target %ld,%ld,%ld does not divide %ldx%ldx%ld tokens\n",
                         t, h, w, T, H, W);
            return 4;
        }
        const int64_t flat_shape[2] = {T * H * W, C};
        TensorGuard flat;
        flat.t = ltk_tensor_create(flat_shape, 2, ltk_tensor_data(tokens.t));
        if (!flat.t) return fail(LTK_ERR_CONTRACT);
        if (ltk_status s = ltk_tome_merge(flat.t, target_count, &out.t); s != LTK_OK) return fail(s);
    } else {
        if (ltk_status s = ltk_compress(method.c_str(), tokens.t, cls.t, t, h, w, &out.t); s != LTK_OK)
            return fail(s);
    }
    if (ltk_status s = ltk_tensor_save(out.t, out_path.c_str()); s != LTK_OK) return fail(s);

    std::ofstream prov(out_path + ".prov");
    if (!prov) {
        std::fprintf(stderr, "litetok: cannot write provenance sidecar %s.prov\n", out_path.c_str());
        return 2;
    }
    prov << "method=" << method << " source=" << T << "x" << H << "x" << W << "x" << C << " target=" << t
         << "x" << h << "x" << w << " r=" << (T * H * W) / (t * h * w) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"litetok: spatio-temporal token compression toolkit"};
    app.require_subcommand(1);

    std::string cfg_path, out_dir, method, target, tokens_path, cls_path, out_path, csv_path;

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic video corpus");
    gen->add_option("spec", cfg_path, "config file with a [data] section")->required();
    gen->add_option("out", out_dir, "output corpus directory")->required();

    auto* distill = app.add_subcommand("distill", "run a distillation training job");
    distill->add_option("config", cfg_path, "run config file")->required();

    auto* compress = app.add_subcommand("compress", "compress a stored feature map");
    compress->add_option("--method", method, "wap | avg | max | sub | tome")->required();
    compress->add_option("--target", target, "target extents t,h,w")->required();
    compress->add_option("tokens", tokens_path, "LTF1 token tensor [TxHxWxC]")->required();
    compress->add_option("cls", cls_path, "LTF1 class-token tensor [TxC]")->required();
    compress->add_option("out", out_path, "output LTF1 path")->required();

    auto* profile = app.add_subcommand("profile", "emit the cost-model CSV");
    profile->add_option("config", cfg_path, "config file with a [profile] section")->required();
    profile->add_option("-o,--output", csv_path, "CSV output path (overrides the config)");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        if (ltk_status s = ltk_gen_data(cfg_path.c_str(), out_dir.c_str()); s != LTK_OK) return fail(s);
        return 0;
    }
    if (distill->parsed()) {
        if (ltk_status s = ltk_distill(cfg_path.c_str()); s != LTK_OK) return fail(s);
        return 0;
    }
    if (compress->parsed()) return cmd_compress(method, target, tokens_path, cls_path, out_path);
    if (profile->parsed()) {
        if (ltk_status s = ltk_profile(cfg_path.c_str(), csv_path.empty() ? nullptr : csv_path.c_str());
            s != LTK_OK)
            return fail(s);
        return 0;
    }
    return 1;
}
