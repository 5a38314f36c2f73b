/* C interface to the sybillab library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function (passing NULL is a no-op). Every fallible call
 * returns an sl_status; on failure the thread's last error message is
 * available from sl_last_error() until the next failing call on that thread.
 * Pointers returned through *_data accessors are borrowed and stay valid
 * until the owning handle is freed.
 */
#ifndef SYBILLAB_H
#define SYBILLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(SYBILLAB_BUILDING)
#define SL_API __attribute__((visibility("default")))
#else
#define SL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sl_status {
  SL_OK = 0,
  SL_INVALID_ARGUMENT = 1, /* contract violation, bad config or flag value */
  SL_IO_ERROR = 2,         /* unreadable, unwritable or malformed file */
  SL_RUNTIME_FAILURE = 3,  /* well-formed request that could not complete */
  SL_INTERNAL_ERROR = 4
} sl_status;

typedef struct sl_graph sl_graph;
typedef struct sl_labels sl_labels;
typedef struct sl_split sl_split;
typedef struct sl_network sl_network;
typedef struct sl_sample sl_sample;
typedef struct sl_scores sl_scores;
typedef struct sl_model sl_model;
typedef struct sl_experiment sl_experiment;
typedef struct sl_records sl_records;

SL_API const char* sl_version(void);
SL_API const char* sl_last_error(void);
SL_API const char* sl_status_name(sl_status status);
/* Releases strings returned by the library. */
SL_API void sl_string_free(char* s);

/* ---- graphs ---- */

typedef enum sl_direction { SL_DIRECTION_UNION = 0, SL_DIRECTION_MUTUAL = 1 } sl_direction;

/* Edge list with numeric ids (the format written by sl_graph_save). */
SL_API sl_status sl_graph_load(const char* path, sl_graph** out);
/* Arbitrary tokens, densified in first-appearance order. */
SL_API sl_status sl_graph_load_edge_list(const char* path, sl_direction direction, sl_graph** out);
SL_API sl_status sl_graph_save(const sl_graph* g, const char* path);
SL_API size_t sl_graph_node_count(const sl_graph* g);
SL_API size_t sl_graph_edge_count(const sl_graph* g);
SL_API void sl_graph_free(sl_graph* g);

/* "id honest|sybil" (or 0/1) per line; every node in [0, node_count) must appear. */
SL_API sl_status sl_labels_load(const char* path, size_t node_count, sl_labels** out);
SL_API void sl_labels_free(sl_labels* labels);

/* Known nodes in label-file format. */
SL_API sl_status sl_split_load(const char* path, size_t node_count, sl_split** out);
SL_API size_t sl_split_known_honest(const sl_split* split);
SL_API size_t sl_split_known_sybil(const sl_split* split);
SL_API void sl_split_free(sl_split* split);

/* ---- synthesis ---- */

typedef struct sl_network_info {
  size_t nodes;
  size_t edges;
  size_t honest;
  size_t sybil;
  size_t attack_edges;
  size_t known_honest;
  size_t known_sybil;
} sl_network_info;

/* spec_json: {"honest", "sybil", "attack", "train_fraction", "seed"}.
 * When seed_override is non-NULL it replaces the spec's seed. Relative file
 * region paths resolve against base_dir (may be NULL for the cwd). */
SL_API sl_status sl_network_synthesize(const char* spec_json, const uint64_t* seed_override, const char* base_dir,
                                       sl_network** out);
/* Writes graph.txt, labels.txt, split.txt, attack_edges.txt and spec.json. */
SL_API sl_status sl_network_save(const sl_network* net, const char* dir);
SL_API sl_status sl_network_load(const char* dir, sl_network** out);
SL_API void sl_network_get_info(const sl_network* net, sl_network_info* info);
/* New handles holding copies of the network's parts. */
SL_API sl_status sl_network_graph(const sl_network* net, sl_graph** out);
SL_API sl_status sl_network_split(const sl_network* net, sl_split** out);
SL_API sl_status sl_network_labels(const sl_network* net, sl_labels** out);
SL_API void sl_network_free(sl_network* net);

/* ---- sampling ---- */

SL_API sl_status sl_sample_forest_fire(const sl_graph* g, double fraction, double burn_probability, uint64_t seed,
                                       sl_sample** out);
SL_API sl_status sl_sample_subgraph(const sl_sample* sample, sl_graph** out);
/* Subgraph id -> original id, ascending. */
SL_API void sl_sample_node_map(const sl_sample* sample, const uint32_t** data, size_t* count);
/* Writes the node map, one original id per line. */
SL_API sl_status sl_sample_save_node_map(const sl_sample* sample, const char* path);
/* Labels restricted to the sampled nodes. */
SL_API sl_status sl_sample_labels(const sl_sample* sample, const sl_labels* labels, sl_labels** out);
SL_API sl_status sl_labels_save(const sl_labels* labels, const char* path);
SL_API void sl_sample_free(sl_sample* sample);

/* ---- detection ---- */

/* algorithm: sybilrank | sybilbelief | sybilscar-c | sybilscar-d */
SL_API sl_status sl_detect(const char* algorithm, const sl_graph* g, const sl_split* split, unsigned threads,
                           sl_scores** out);
SL_API size_t sl_scores_size(const sl_scores* scores);
SL_API const double* sl_scores_data(const sl_scores* scores);
SL_API const char* sl_scores_detector(const sl_scores* scores);
/* CSV "node,score[,label]"; the label column is written when with_threshold != 0. */
SL_API sl_status sl_scores_save(const sl_scores* scores, const char* path, int with_threshold, double threshold);
SL_API sl_status sl_scores_load(const char* path, sl_scores** out);
SL_API void sl_scores_free(sl_scores* scores);

/* ---- GAT ---- */

/* hyper_json may be NULL for defaults; seed_override replaces its seed. */
SL_API sl_status sl_train(const sl_graph* g, const sl_split* split, const char* hyper_json,
                          const uint64_t* seed_override, sl_model** out);
/* Training report as a JSON document; free with sl_string_free. NULL for loaded models. */
SL_API char* sl_model_report_json(const sl_model* model);
SL_API double sl_model_threshold(const sl_model* model);
SL_API sl_status sl_model_save(const sl_model* model, const char* path);
SL_API sl_status sl_model_load(const char* path, sl_model** out);
SL_API void sl_model_free(sl_model* model);

/* Holds out part of the known nodes to estimate a threshold, predicts with
 * the rest as input. */
SL_API sl_status sl_predict(const sl_model* model, const sl_graph* g, const sl_split* known, uint64_t seed,
                            sl_scores** out, double* threshold);
/* All known nodes as input; no threshold estimation. */
SL_API sl_status sl_predict_scores(const sl_model* model, const sl_graph* g, const sl_split* known,
                                   sl_scores** out);

/* ---- evaluation ---- */

typedef struct sl_eval_result {
  double auc;
  double accuracy;
  double precision;
  double recall;
  size_t evaluated;
} sl_eval_result;

/* Metrics over all nodes, or over the unknown nodes when split is non-NULL. */
SL_API sl_status sl_evaluate(const sl_scores* scores, const sl_labels* labels, const sl_split* split,
                             double threshold, sl_eval_result* out);

/* ---- experiments ---- */

typedef struct sl_run_options {
  unsigned workers;
  int record_timing;
  int allow_large;
  int has_seed;
  uint64_t seed;
} sl_run_options;

SL_API sl_status sl_experiment_load(const char* config_path, sl_experiment** out);
/* Output path named in the config, "" when absent. */
SL_API const char* sl_experiment_output(const sl_experiment* exp);
SL_API const char* sl_experiment_name(const sl_experiment* exp);
SL_API void sl_experiment_free(sl_experiment* exp);

SL_API sl_status sl_experiment_run(const sl_experiment* exp, const sl_run_options* options, sl_records** out);
SL_API size_t sl_records_count(const sl_records* records);
/* Format from the extension: .json, otherwise CSV. */
SL_API sl_status sl_records_save(const sl_records* records, const char* path);
SL_API sl_status sl_records_load(const char* path, sl_records** out);
/* Per-curve mean/std series over attack edges per Sybil. */
SL_API sl_status sl_records_save_plot_data(const sl_records* records, const char* path);
/* Aggregated cells as CSV text; free with sl_string_free. */
SL_API char* sl_records_summary(const sl_records* records);
SL_API void sl_records_free(sl_records* records);

#ifdef __cplusplus
}
#endif

#endif
