/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef DEPTHQ_H
#define DEPTHQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DqStatus {
  DQ_STATUS_OK = 0,
  DQ_STATUS_NULL_POINTER = 1,
  DQ_STATUS_INVALID_ARGUMENT = 2,
  DQ_STATUS_SHAPE_MISMATCH = 3,
  DQ_STATUS_IO = 4,
  DQ_STATUS_DEGENERATE_INPUT = 5,
  DQ_STATUS_NO_ANCHORS = 6,
  DQ_STATUS_PANIC = 7,
} DqStatus;

// Grayscale map of `f64` values in row-major order.
typedef struct DqGrayMap DqGrayMap;

// 8-bit RGB image.
typedef struct DqRgbMap DqRgbMap;

// Diagnostics of an edge-consistency map.
typedef struct DqEcMeta {
  double tc;
  double ta;
  size_t apc_count;
  size_t apa_count;
  bool low_confidence;
} DqEcMeta;

// Evaluation of one saliency map. The F-measure fields are meaningful only
// when `has_f` is set (ground truth with foreground).
typedef struct DqMetrics {
  double sm;
  double adp_e;
  double max_e;
  double adp_f;
  double mean_f;
  double max_f;
  double mae;
  bool has_f;
} DqMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *dq_version(void);

// Message of the last failed call on this thread, empty after a success.
// Valid until the next `dq_*` call on the same thread.
const char *dq_last_error_message(void);

// Copies `width * height` values from `data`. Values must be finite.
//
// # Safety
// `data` must point to `width * height` readable doubles; `out` must be
// writable.
enum DqStatus dq_gray_new(size_t width, size_t height, const double *data, struct DqGrayMap **out);

// # Safety
// `map` must be null or a handle from this library that is not used again.
void dq_gray_free(struct DqGrayMap *map);

// # Safety
// `map` must be null or a live handle.
size_t dq_gray_width(const struct DqGrayMap *map);

// # Safety
// `map` must be null or a live handle.
size_t dq_gray_height(const struct DqGrayMap *map);

// Copies the values into `out`, which must hold `len >= width * height`
// doubles.
//
// # Safety
// `map` must be a live handle; `out` must point to `len` writable doubles.
enum DqStatus dq_gray_copy_data(const struct DqGrayMap *map, double *out, size_t len);

// Loads an 8- or 16-bit image as gray values in `[0, 1]`.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum DqStatus dq_gray_load_png(const char *path, struct DqGrayMap **out);

// Saves as 8-bit grayscale PNG.
//
// # Safety
// `map` must be a live handle; `path` a NUL-terminated string.
enum DqStatus dq_gray_save_png(const struct DqGrayMap *map, const char *path);

// Copies `3 * width * height` interleaved RGB bytes.
//
// # Safety
// `data` must point to `3 * width * height` readable bytes; `out` must be
// writable.
enum DqStatus dq_rgb_new(size_t width, size_t height, const uint8_t *data, struct DqRgbMap **out);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum DqStatus dq_rgb_load_png(const char *path, struct DqRgbMap **out);

// # Safety
// `map` must be null or a handle from this library that is not used again.
void dq_rgb_free(struct DqRgbMap *map);

// Edge-consistency map with default parameters. `contour` may be null, in
// which case the RGB luminance gradient is used. `meta` may be null.
//
// # Safety
// Handles must be live (or null where allowed); `out` must be writable.
enum DqStatus dq_edge_consistency(const struct DqRgbMap *image,
                                  const struct DqGrayMap *depth,
                                  const struct DqGrayMap *contour,
                                  uint64_t slic_seed,
                                  struct DqGrayMap **out,
                                  struct DqEcMeta *meta);

// Regional-uncertainty map with default parameters, anchored on the
// edge-consistency anchors of the same inputs. `low_confidence` may be
// null.
//
// # Safety
// Handles must be live (or null where allowed); `out` must be writable.
enum DqStatus dq_regional_uncertainty(const struct DqRgbMap *image,
                                      const struct DqGrayMap *depth,
                                      const struct DqGrayMap *contour,
                                      uint64_t slic_seed,
                                      struct DqGrayMap **out,
                                      bool *low_confidence);

// `|sal_rgbr - sal_rgbd|` per pixel.
//
// # Safety
// Handles must be live; `out` must be writable.
enum DqStatus dq_model_variance(const struct DqGrayMap *sal_rgbd,
                                const struct DqGrayMap *sal_rgbr,
                                struct DqGrayMap **out);

// Quality-weighted fusion. Any of `ec`, `ru`, `mv` may be null to leave
// that map out.
//
// # Safety
// Handles must be live (or null where allowed); `out` must be writable.
enum DqStatus dq_fuse(const struct DqGrayMap *sal_rgb,
                      const struct DqGrayMap *sal_d,
                      const struct DqGrayMap *ec,
                      const struct DqGrayMap *ru,
                      const struct DqGrayMap *mv,
                      struct DqGrayMap **out);

// All evaluation metrics of one saliency map.
//
// # Safety
// Handles must be live; `out` must be writable.
enum DqStatus dq_evaluate(const struct DqGrayMap *sal,
                          const struct DqGrayMap *gt,
                          struct DqMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEPTHQ_H */
