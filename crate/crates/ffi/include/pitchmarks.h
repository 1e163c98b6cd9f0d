#ifndef PITCHMARKS_H
#define PITCHMARKS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PmStatus {
  PM_STATUS_OK = 0,
  PM_STATUS_NULL_POINTER = 1,
  PM_STATUS_INVALID_ARGUMENT = 2,
  PM_STATUS_DIMENSION_MISMATCH = 3,
  PM_STATUS_CONFIG = 4,
  PM_STATUS_IO = 5,
  PM_STATUS_NO_FIT = 6,
  PM_STATUS_CAMERA = 7,
  PM_STATUS_OUT_OF_RANGE = 8,
  PM_STATUS_PANIC = 9,
} PmStatus;

// Run configuration (all tunables).
typedef struct PmConfig PmConfig;

// Result of one detection: line mask, probability image, per-pixel labels
// and fitted primitives.
typedef struct PmDetection PmDetection;

// Straight line `normal · (row, col) = offset` with the extremes of its support.
typedef struct PmLine {
  double normal[2];
  double offset;
  // `(row, col)` of both ends.
  double endpoints[2][2];
  double rmse;
  size_t pixel_count;
} PmLine;

// Ellipse with center `(x, y) = (col, row)`, semi-axes and orientation.
typedef struct PmEllipse {
  double center[2];
  double axes[2];
  double theta;
  double rmse;
  size_t pixel_count;
} PmEllipse;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on this thread.
const char *pm_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *pm_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void pm_string_free(char *s);

// Default configuration. Never null.
struct PmConfig *pm_config_new(void);

// Parses a TOML configuration; unknown keys and out-of-range values fail.
//
// # Safety
// `text` must be a NUL-terminated string; `out` a valid pointer.
enum PmStatus pm_config_from_toml(const char *text, struct PmConfig **out);

// Loads a TOML configuration file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` a valid pointer.
enum PmStatus pm_config_load(const char *path, struct PmConfig **out);

// The configuration as TOML; release with [`pm_string_free`].
//
// # Safety
// `cfg` must be a live handle; `out` a valid pointer.
enum PmStatus pm_config_to_toml(const struct PmConfig *cfg, char **out);

// Sets the master random seed.
//
// # Safety
// `cfg` must be a live handle.
enum PmStatus pm_config_set_seed(struct PmConfig *cfg, uint64_t seed);

// Sets the number of watershed experiments (>= 1).
//
// # Safety
// `cfg` must be a live handle.
enum PmStatus pm_config_set_experiments(struct PmConfig *cfg, size_t experiments);

// Sets the line probability threshold, in (0, 1].
//
// # Safety
// `cfg` must be a live handle.
enum PmStatus pm_config_set_threshold(struct PmConfig *cfg, double threshold);

// Releases a configuration. Null is ignored.
//
// # Safety
// `cfg` must come from this library and not be freed twice.
void pm_config_free(struct PmConfig *cfg);

// Detects line marks in an 8-bit image of `height * width * channels`
// interleaved samples (`channels` 1 or 3). `field` holds `height * width`
// bytes, nonzero on the playing field, or is null for the whole frame.
//
// # Safety
// Buffers must hold the stated number of bytes; `cfg` must be a live
// handle; `out` a valid pointer.
enum PmStatus pm_detect(const struct PmConfig *cfg,
                        const uint8_t *pixels,
                        size_t height,
                        size_t width,
                        size_t channels,
                        const uint8_t *field,
                        struct PmDetection **out);

// Image height of a detection, or 0 for null.
//
// # Safety
// `det` must be a live handle or null.
size_t pm_detection_height(const struct PmDetection *det);

// Image width of a detection, or 0 for null.
//
// # Safety
// `det` must be a live handle or null.
size_t pm_detection_width(const struct PmDetection *det);

// Copies the binary line mask (1 = line pixel) into `out[0..height*width]`.
//
// # Safety
// `det` must be a live handle; `out` must hold `len` bytes.
enum PmStatus pm_detection_mask(const struct PmDetection *det, uint8_t *out, size_t len);

// Copies the line probabilities in `[0, 1]` into `out[0..height*width]`.
//
// # Safety
// `det` must be a live handle; `out` must hold `len` doubles.
enum PmStatus pm_detection_probability(const struct PmDetection *det, double *out, size_t len);

// Copies per-pixel labels (0 background or discarded, 1 line, 2 ellipse)
// into `out[0..height*width]`.
//
// # Safety
// `det` must be a live handle; `out` must hold `len` bytes.
enum PmStatus pm_detection_labels(const struct PmDetection *det, uint8_t *out, size_t len);

// Number of straight-line primitives, or 0 for null.
//
// # Safety
// `det` must be a live handle or null.
size_t pm_detection_line_count(const struct PmDetection *det);

// Number of ellipse primitives, or 0 for null.
//
// # Safety
// `det` must be a live handle or null.
size_t pm_detection_ellipse_count(const struct PmDetection *det);

// Writes straight line `index` to `out`.
//
// # Safety
// `det` must be a live handle; `out` a valid pointer.
enum PmStatus pm_detection_line(const struct PmDetection *det, size_t index, struct PmLine *out);

// Writes ellipse `index` to `out`.
//
// # Safety
// `det` must be a live handle; `out` a valid pointer.
enum PmStatus pm_detection_ellipse(const struct PmDetection *det,
                                   size_t index,
                                   struct PmEllipse *out);

// Primitives as a JSON document; release with [`pm_string_free`].
//
// # Safety
// `det` must be a live handle; `out` a valid pointer.
enum PmStatus pm_detection_to_json(const struct PmDetection *det, char **out);

// Releases a detection. Null is ignored.
//
// # Safety
// `det` must come from this library and not be freed twice.
void pm_detection_free(struct PmDetection *det);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PITCHMARKS_H */
