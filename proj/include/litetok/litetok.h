/* litetok: spatio-temporal token compression toolkit, C API.
 *
 * All functions returning ltk_status leave a one-line description of the
 * last failure in ltk_last_error() (thread-local). Handles are opaque;
 * every created handle must be released with its matching free function.
 */
#ifndef LITETOK_H
#define LITETOK_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ltk_status {
    LTK_OK = 0,
    LTK_ERR_CONTRACT = 1,   /* precondition violated */
    LTK_ERR_DIMENSION = 2,  /* tensor shape mismatch */
    LTK_ERR_PARTITION = 3,  /* non-divisible block partition or tiling */
    LTK_ERR_CONFIG = 4,     /* config parse or validation failure */
    LTK_ERR_NUMERIC = 5,    /* NaN/Inf where finite values are required */
    LTK_ERR_IO = 6          /* file read/write failure */
} ltk_status;

typedef struct ltk_tensor ltk_tensor;

const char* ltk_version(void);
const char* ltk_status_str(ltk_status status);
const char* ltk_last_error(void);

/* ---- tensors (row-major f32, LTF1 on disk) ---- */

ltk_tensor* ltk_tensor_create(const int64_t* extents, int32_t ndim, const float* data);
void ltk_tensor_free(ltk_tensor* t);
int32_t ltk_tensor_ndim(const ltk_tensor* t);
int64_t ltk_tensor_extent(const ltk_tensor* t, int32_t axis);
int64_t ltk_tensor_numel(const ltk_tensor* t);
const float* ltk_tensor_data(const ltk_tensor* t);

ltk_status ltk_tensor_load(const char* path, ltk_tensor** out);
ltk_status ltk_tensor_save(const ltk_tensor* t, const char* path);

/* ---- post-hoc token compression ----
 *
 * tokens: [T x H x W x C], cls: [T x C]. method: "wap" | "avg" | "max" | "sub".
 * The output has shape [t x h x w x C]; (t,h,w) must divide (T,H,W).
 */
ltk_status ltk_compress(const char* method, const ltk_tensor* tokens, const ltk_tensor* cls,
                        int64_t t, int64_t h, int64_t w, ltk_tensor** out);

/* Bipartite soft-matching merge of [N x C] tokens down to target_count rows. */
ltk_status ltk_tome_merge(const ltk_tensor* tokens, int64_t target_count, ltk_tensor** out);

/* Splits [T x Hpx x Wpx x 3] frames into (Hpx/base)*(Wpx/base) tiles of
 * [T x base x base x 3] in row-major tile order. tiles must hold tile_capacity
 * slots; fails with LTK_ERR_CONTRACT when more tiles would be produced. */
ltk_status ltk_tile_frames(const ltk_tensor* frames, int64_t base, ltk_tensor** tiles,
                           int64_t tile_capacity, int64_t* tiles_written);

/* ---- config-driven pipelines (formats documented in the README) ---- */

/* Writes a deterministic synthetic video corpus described by [data] in cfg. */
ltk_status ltk_gen_data(const char* cfg_path, const char* out_dir);

/* Runs a distillation training job; outputs land in the configured run_dir. */
ltk_status ltk_distill(const char* cfg_path);

/* Emits the cost-model CSV for [profile] in cfg. out_csv overrides the
 * configured output path; NULL keeps it (stdout when unset). */
ltk_status ltk_profile(const char* cfg_path, const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* LITETOK_H */
