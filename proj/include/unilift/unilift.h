/* unilift C API.
 *
 * All functions return a ul_status. On failure, ul_last_error_message() returns a
 * description of the most recent error on the calling thread; the pointer stays
 * valid until the next failing call on that thread.
 */
#ifndef UNILIFT_UNILIFT_H
#define UNILIFT_UNILIFT_H

#include <stddef.h>
#include <stdint.h>

#if defined(UNILIFT_BUILDING_LIBRARY)
#define UL_API __attribute__((visibility("default")))
#else
#define UL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ul_status {
  UL_OK = 0,
  UL_ERR_INVALID_ARGUMENT = 1,
  UL_ERR_CONFIG = 2,
  UL_ERR_IO = 3,
  UL_ERR_NUMERICAL = 4,
  UL_ERR_INFEASIBLE = 5,
  UL_ERR_CAPACITY = 6,
  UL_ERR_INTERNAL = 7
} ul_status;

typedef struct ul_config ul_config;

UL_API const char* ul_version(void);
UL_API const char* ul_status_name(ul_status status);
UL_API const char* ul_last_error_message(void);

/* Run configuration: `key = value` settings with documented defaults. */
UL_API ul_status ul_config_create(ul_config** out);
UL_API void ul_config_destroy(ul_config* config);
UL_API ul_status ul_config_set(ul_config* config, const char* key, const char* value);
UL_API ul_status ul_config_load_file(ul_config* config, const char* path);
/* Copies a NUL-terminated value into buffer. *needed receives the required size
 * including the terminator; a short buffer yields UL_ERR_INVALID_ARGUMENT. */
UL_API ul_status ul_config_get(const ul_config* config, const char* key, char* buffer, size_t capacity,
                               size_t* needed);
UL_API ul_status ul_config_to_text(const ul_config* config, char* buffer, size_t capacity, size_t* needed);
UL_API ul_status ul_config_validate(const ul_config* config);

typedef struct ul_synth_summary {
  int objects;
  int training_views;
  int heldout_views;
  uint64_t pixels;
} ul_synth_summary;

/* Generates a synthetic dataset (scene, masks, manifest) into out_dir. */
UL_API ul_status ul_synth_write(const ul_config* config, const char* out_dir, ul_synth_summary* summary);

typedef struct ul_train_summary {
  int iterations;
  int training_views;
  int masked_views;
  double final_cluster;
  double final_triplet;
  double final_reg3d;
  double final_total;
} ul_train_summary;

/* Trains on the dataset at `dataset` (directory or manifest) and writes the model. */
UL_API ul_status ul_train(const ul_config* config, const char* dataset, const char* out_dir, ul_train_summary* summary);

/* Renders and decodes every held-out view, writing instance/semantic PGMs and raw
 * embedding maps. *views_written may be NULL. */
UL_API ul_status ul_decode(const ul_config* config, const char* dataset, const char* model_dir, const char* out_dir,
                           int* views_written);

typedef struct ul_eval_summary {
  double pq_scene;
  double miou;
  int collisions;
  int has_baseline;
  double baseline_pq_scene;
  double baseline_miou;
  double decode_seconds;
  double baseline_seconds;
  double scaling_slope_ratio; /* 0 unless produced by ul_compare */
} ul_eval_summary;

/* Writes metrics.json (deterministic) and, with a baseline, timings.json. */
UL_API ul_status ul_evaluate(const ul_config* config, const char* dataset, const char* model_dir, const char* out_dir,
                             int compare_baseline, ul_eval_summary* summary);
/* Evaluation with the baseline plus the decode scaling measurement. */
UL_API ul_status ul_compare(const ul_config* config, const char* dataset, const char* model_dir, const char* out_dir,
                            ul_eval_summary* summary);

typedef struct ul_toy_summary {
  int groups;
  int steps;
  int distinct_corners;
  double min_pairwise_distance;
  double max_corner_deviation;
  double max_final_spread; /* mean squared distance of a group's points to its mean */
} ul_toy_summary;

/* Writes toy_trajectory.csv and toy_report.json. */
UL_API ul_status ul_toy(const ul_config* config, const char* out_dir, ul_toy_summary* summary);

/* Decodes a row-major height x width x dim buffer of raw embeddings. coverage may be
 * NULL (every pixel covered). labels receives width * height values. */
UL_API ul_status ul_decode_embedding_buffer(const double* values, const double* coverage, int width, int height,
                                            int dim, double threshold, uint32_t* labels);

#ifdef __cplusplus
}
#endif

#endif /* UNILIFT_UNILIFT_H */
