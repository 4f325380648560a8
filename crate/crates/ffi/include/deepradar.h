#ifndef DEEPRADAR_H
#define DEEPRADAR_H

#include <stddef.h>
#include <stdint.h>

// Result codes.
typedef enum DrStatus {
  DR_STATUS_OK = 0,
  DR_STATUS_NULL_POINTER = 1,
  DR_STATUS_INVALID_ARGUMENT = 2,
  DR_STATUS_IO = 3,
  DR_STATUS_FORMAT = 4,
  DR_STATUS_NUMERIC = 5,
  // A split reader has no more records.
  DR_STATUS_END = 6,
  DR_STATUS_INTERNAL = 7,
} DrStatus;

// A loaded classifier.
typedef struct DrModel DrModel;

// A streaming reader over a split file.
typedef struct DrSplitReader DrSplitReader;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread. The pointer stays
// valid until the next failing call on the same thread.
const char *dr_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *dr_version(void);

// Number of radar classes.
uint32_t dr_class_count(void);

// Static name of radar class `index`, or NULL when out of range.
const char *dr_class_name(uint32_t index);

// Generate example `index` of radar class `class_index` at `snr_db`,
// exactly as the training split of a dataset with `master_seed` would.
// Writes `2 * 1024` interleaved I/Q floats to `out_iq`; `out_len` is the
// buffer length in floats.
enum DrStatus dr_generate_example(uint32_t class_index,
                                  int16_t snr_db,
                                  uint64_t master_seed,
                                  uint64_t index,
                                  float *out_iq,
                                  uintptr_t out_len);

// Load a checkpoint. On success `*out` receives a handle to release with
// [`dr_model_free`].
enum DrStatus dr_model_load(const char *path, struct DrModel **out);

void dr_model_free(struct DrModel *model);

// Number of output classes, or 0 for a NULL handle.
uint32_t dr_model_num_classes(const struct DrModel *model);

// Parameter counts of the recurrent stack and the dense head.
enum DrStatus dr_model_param_counts(const struct DrModel *model, uint64_t *lstm, uint64_t *head);

// Classify one signal of `n_samples` complex samples given as interleaved
// I/Q floats. Class probabilities go to `probs` (`probs_len` must be at
// least the class count; may be NULL when `probs_len` is 0) and the arg-max
// class to `*class_out`.
enum DrStatus dr_model_predict(const struct DrModel *model,
                               const float *iq,
                               uintptr_t n_samples,
                               float *probs,
                               uintptr_t probs_len,
                               uint32_t *class_out);

// Open a split file for streaming. Release with [`dr_split_free`].
enum DrStatus dr_split_open(const char *path, struct DrSplitReader **out);

void dr_split_free(struct DrSplitReader *reader);

// Header fields of an open split; any output pointer may be NULL.
enum DrStatus dr_split_info(const struct DrSplitReader *reader,
                            uint64_t *record_count,
                            uint32_t *n_classes,
                            uint32_t *signal_length);

// Read the next record. Returns `DR_STATUS_END` after the last one.
// `iq_len` is the buffer length in floats (at least twice the signal
// length).
enum DrStatus dr_split_next(struct DrSplitReader *reader,
                            uint16_t *class_index,
                            int16_t *snr_db,
                            float *iq,
                            uintptr_t iq_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEEPRADAR_H */
