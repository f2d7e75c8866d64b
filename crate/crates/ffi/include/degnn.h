#ifndef DEGNN_H
#define DEGNN_H

#include <stddef.h>
#include <stdint.h>

typedef enum DegnnStatus {
  DEGNN_STATUS_OK = 0,
  DEGNN_STATUS_NULL_POINTER = 1,
  DEGNN_STATUS_INVALID_ARGUMENT = 2,
  DEGNN_STATUS_OUT_OF_RANGE = 3,
  DEGNN_STATUS_BUFFER_TOO_SMALL = 4,
  DEGNN_STATUS_IO = 5,
  DEGNN_STATUS_PARSE = 6,
  DEGNN_STATUS_INTERNAL = 7,
} DegnnStatus;

// Graph, features and labels loaded from disk.
typedef struct DegnnDataset DegnnDataset;

// Undirected simple graph in CSR form.
typedef struct DegnnGraph DegnnGraph;

// Ego-subgraph around one target, nodes in BFS order.
typedef struct DegnnSubgraph DegnnSubgraph;

// Summary statistics of a loaded dataset.
typedef struct DegnnStats {
  uint64_t num_nodes;
  uint64_t num_edges;
  uint64_t num_features;
  uint64_t num_classes;
  double homophily;
} DegnnStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *degnn_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *degnn_version(void);

// Builds a graph from `num_edges` pairs `(src[i], dst[i])`. Direction,
// duplicates and self-loops are dropped.
//
// # Safety
// `src` and `dst` must point to `num_edges` values; `out_graph` must be writable.
enum DegnnStatus degnn_graph_from_edges(const uint64_t *src,
                                        const uint64_t *dst,
                                        size_t num_edges,
                                        uint64_t num_nodes,
                                        struct DegnnGraph **out_graph);

// # Safety
// `graph` must come from this library and not be used afterwards. Null is ignored.
void degnn_graph_free(struct DegnnGraph *graph);

// # Safety
// `graph` must be a live handle or null.
enum DegnnStatus degnn_graph_num_nodes(const struct DegnnGraph *graph, uint64_t *out_n);

// Number of undirected edges.
//
// # Safety
// `graph` must be a live handle or null.
enum DegnnStatus degnn_graph_num_edges(const struct DegnnGraph *graph, uint64_t *out_m);

// # Safety
// `graph` must be a live handle or null.
enum DegnnStatus degnn_graph_degree(const struct DegnnGraph *graph,
                                    uint64_t node,
                                    uint64_t *out_deg);

// Sorted neighbours of `node`.
//
// # Safety
// `buf` must hold `cap` values; `out_len` must be writable.
enum DegnnStatus degnn_graph_neighbors(const struct DegnnGraph *graph,
                                       uint64_t node,
                                       uint64_t *buf,
                                       size_t cap,
                                       size_t *out_len);

// Fraction of edges whose endpoints share a label. `labels` has one entry
// per node, each below `num_classes`.
//
// # Safety
// `labels` must point to `num_labels` values.
enum DegnnStatus degnn_homophily(const struct DegnnGraph *graph,
                                 const uint64_t *labels,
                                 size_t num_labels,
                                 uint64_t num_classes,
                                 double *out_h);

// Random-walk landing probabilities from `target`, written row-major as a
// `num_nodes x k` matrix: entry `(v, j)` is the probability of being at `v`
// after `j + 1` steps.
//
// # Safety
// `buf` must hold `cap` doubles; `out_cols` must be writable.
enum DegnnStatus degnn_rw_encoding(const struct DegnnGraph *graph,
                                   uint64_t target,
                                   uint64_t k,
                                   double *buf,
                                   size_t cap,
                                   size_t *out_cols);

// One-hot shortest-path distance from `target`, row-major `num_nodes x (k + 2)`.
// Column `d` marks distance `d` for `d <= k`; the last column marks farther
// or unreachable nodes.
//
// # Safety
// `buf` must hold `cap` doubles; `out_cols` must be writable.
enum DegnnStatus degnn_spd_encoding(const struct DegnnGraph *graph,
                                    uint64_t target,
                                    uint64_t k,
                                    double *buf,
                                    size_t cap,
                                    size_t *out_cols);

// Nodes within `hops` of `target`, relabelled in BFS order (target first).
//
// # Safety
// `out_sub` must be writable.
enum DegnnStatus degnn_ego_subgraph(const struct DegnnGraph *graph,
                                    uint64_t target,
                                    uint64_t hops,
                                    struct DegnnSubgraph **out_sub);

// # Safety
// `sub` must come from this library and not be used afterwards. Null is ignored.
void degnn_subgraph_free(struct DegnnSubgraph *sub);

// # Safety
// `sub` must be a live handle or null.
enum DegnnStatus degnn_subgraph_num_nodes(const struct DegnnSubgraph *sub, uint64_t *out_n);

// Parent-graph id of each local node.
//
// # Safety
// `buf` must hold `cap` values; `out_len` must be writable.
enum DegnnStatus degnn_subgraph_node_map(const struct DegnnSubgraph *sub,
                                         uint64_t *buf,
                                         size_t cap,
                                         size_t *out_len);

// Hop distance of each local node from the target.
//
// # Safety
// `buf` must hold `cap` values; `out_len` must be writable.
enum DegnnStatus degnn_subgraph_distances(const struct DegnnSubgraph *sub,
                                          uint64_t *buf,
                                          size_t cap,
                                          size_t *out_len);

// Copies the induced subgraph into a new, independently owned graph handle.
//
// # Safety
// `out_graph` must be writable.
enum DegnnStatus degnn_subgraph_graph(const struct DegnnSubgraph *sub,
                                      struct DegnnGraph **out_graph);

// Loads `out_edges.txt` and `out1_node_feature_label.txt` from `dir`.
//
// # Safety
// `dir` must be a NUL-terminated UTF-8 path; `out_ds` must be writable.
enum DegnnStatus degnn_dataset_load(const char *dir, struct DegnnDataset **out_ds);

// # Safety
// `ds` must come from this library and not be used afterwards. Null is ignored.
void degnn_dataset_free(struct DegnnDataset *ds);

// # Safety
// `ds` must be a live handle or null; `out_stats` must be writable.
enum DegnnStatus degnn_dataset_stats(const struct DegnnDataset *ds, struct DegnnStats *out_stats);

// Node labels of the dataset.
//
// # Safety
// `buf` must hold `cap` values; `out_len` must be writable.
enum DegnnStatus degnn_dataset_labels(const struct DegnnDataset *ds,
                                      uint64_t *buf,
                                      size_t cap,
                                      size_t *out_len);

// Copies the dataset graph into a new graph handle.
//
// # Safety
// `out_graph` must be writable.
enum DegnnStatus degnn_dataset_graph(const struct DegnnDataset *ds, struct DegnnGraph **out_graph);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEGNN_H */
