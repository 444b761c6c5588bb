#include "litetok/litetok.h"

#include <cstring>
#include <string>

#include "compress/compress.hpp"
#include "core/ltf.hpp"
#include "pipeline/run.hpp"

using namespace litetok;

struct ltk_tensor {
    Tensor t;
};

namespace {

thread_local std::string g_last_error;

ltk_status classify(const std::exception& e) {
    if (dynamic_cast<const DimensionError*>(&e)) return LTK_ERR_DIMENSION;
    if (dynamic_cast<const PartitionError*>(&e)) return LTK_ERR_PARTITION;
    if (dynamic_cast<const ConfigError*>(&e)) return LTK_ERR_CONFIG;
    if (dynamic_cast<const NumericError*>(&e)) return LTK_ERR_NUMERIC;
    if (dynamic_cast<const IoError*>(&e)) return LTK_ERR_IO;
    return LTK_ERR_CONTRACT;
}

template <typename Fn>
ltk_status guarded(Fn&& fn) {
    try {
        fn();
        return LTK_OK;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return classify(e);
    }
}

}  // namespace

extern "C" {

const char* ltk_version(void) { return "1.0.0"; }

const char* ltk_status_str(ltk_status status) {
    switch (status) {
        case LTK_OK: return "ok";
        case LTK_ERR_CONTRACT: return "contract violation";
        case LTK_ERR_DIMENSION: return "dimension error";
        case LTK_ERR_PARTITION: return "partition error";
        case LTK_ERR_CONFIG: return "config error";
        case LTK_ERR_NUMERIC: return "numeric error";
        case LTK_ERR_IO: return "io error";
    }
    return "unknown";
}

const char* ltk_last_error(void) { return g_last_error.c_str(); }

ltk_tensor* ltk_tensor_create(const int64_t* extents, int32_t ndim, const float* data) {
    if (!extents || ndim < 1) {
        g_last_error = "ltk_tensor_create: extents required";
        return nullptr;
    }
    try {
        std::vector<int64_t> shape(extents, extents + ndim);
        auto* h = new ltk_tensor{Tensor(shape)};
        if (data) std::memcpy(h->t.data.data(), data, h->t.data.size() * sizeof(float));
        return h;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return nullptr;
    }
}

void ltk_tensor_free(ltk_tensor* t) { delete t; }

int32_t ltk_tensor_ndim(const ltk_tensor* t) { return t ? static_cast<int32_t>(t->t.ndim()) : 0; }

int64_t ltk_tensor_extent(const ltk_tensor* t, int32_t axis) {
    if (!t || axis < 0 || axis >= t->t.ndim()) return -1;
    return t->t.shape[axis];
}

int64_t ltk_tensor_numel(const ltk_tensor* t) { return t ? t->t.numel() : 0; }

const float* ltk_tensor_data(const ltk_tensor* t) { return t ? t->t.data.data() : nullptr; }

ltk_status ltk_tensor_load(const char* path, ltk_tensor** out) {
    if (!path || !out) {
        g_last_error = "ltk_tensor_load: null argument";
        return LTK_ERR_CONTRACT;
    }
    return guarded([&] { *out = new ltk_tensor{ltf_read(path)}; });
}

ltk_status ltk_tensor_save(const ltk_tensor* t, const char* path) {
    if (!t || !path) {
        g_last_error = "ltk_tensor_save: null argument";
        return LTK_ERR_CONTRACT;
    }
    return guarded([&] { ltf_write(path, t->t); });
}

ltk_status ltk_compress(const char* method, const ltk_tensor* tokens, const ltk_tensor* cls,
                        int64_t t, int64_t h, int64_t w, ltk_tensor** out) {
    if (!method || !tokens || !cls || !out) {
        g_last_error = "ltk_compress: null argument";
        return LTK_ERR_CONTRACT;
    }
    return guarded([&] {
        FeatureMap fm;
        fm.tokens = std::make_shared<Tensor>(tokens->t);
        fm.cls = std::make_shared<Tensor>(cls->t);
        fm.validate();
        BlockPartition part = partition_blocks(fm.frames(), fm.grid_h(), fm.grid_w(), t, h, w);
        std::string m(method);
        CompressedMap cm;
        if (m == "wap")
            cm = wap_compress(fm, part);
        else if (m == "avg")
            cm = pool_compress(fm, part, PoolMode::Average);
        else if (m == "max")
            cm = pool_compress(fm, part, PoolMode::Max);
        else if (m == "sub")
            cm = pool_compress(fm, part, PoolMode::Subsample);
        else
            throw ConfigError("ltk_compress: unknown method '" + m + "'");
        *out = new ltk_tensor{*cm.tokens};
    });
}

ltk_status ltk_tome_merge(const ltk_tensor* tokens, int64_t target_count, ltk_tensor** out) {
    if (!tokens || !out) {
        g_last_error = "ltk_tome_merge: null argument";
        return LTK_ERR_CONTRACT;
    }
    return guarded([&] {
        TensorPtr merged = tome_merge(std::make_shared<Tensor>(tokens->t), target_count);
        *out = new ltk_tensor{*merged};
    });
}

ltk_status ltk_tile_frames(const ltk_tensor* frames, int64_t base, ltk_tensor** tiles,
                           int64_t tile_capacity, int64_t* tiles_written) {
    if (!frames || !tiles || !tiles_written) {
        g_last_error = "ltk_tile_frames: null argument";
        return LTK_ERR_CONTRACT;
    }
    return guarded([&] {
        std::vector<TensorPtr> result = tile_frames(std::make_shared<Tensor>(frames->t), base);
        if (static_cast<int64_t>(result.size()) > tile_capacity)
            throw ContractError("ltk_tile_frames: capacity " + std::to_string(tile_capacity) +
                                " too small for " + std::to_string(result.size()) + " tiles");
        for (size_t i = 0; i < result.size(); ++i) tiles[i] = new ltk_tensor{*result[i]};
        *tiles_written = static_cast<int64_t>(result.size());
    });
}

ltk_status ltk_gen_data(const char* cfg_path, const char* out_dir) {
    if (!cfg_path || !out_dir) {
        g_last_error = "ltk_gen_data: null argument";
        return LTK_ERR_CONTRACT;
    }
    return guarded([&] { run_gen_data(cfg_path, out_dir); });
}

ltk_status ltk_distill(const char* cfg_path) {
    if (!cfg_path) {
        g_last_error = "ltk_distill: null argument";
        return LTK_ERR_CONTRACT;
    }
    return guarded([&] { run_distill(cfg_path); });
}

ltk_status ltk_profile(const char* cfg_path, const char* out_csv) {
    if (!cfg_path) {
        g_last_error = "ltk_profile: null argument";
        return LTK_ERR_CONTRACT;
    }
    return guarded([&] { run_profile(cfg_path, out_csv ? out_csv : ""); });
}

}  // extern "C"
