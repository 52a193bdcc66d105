/*
 * C interface to the gwCRP spatial survival clustering library.
 *
 * All functions that can fail take a gwcrp_ctx; on failure they return NULL
 * (constructors) or a nonzero status code, and the message is retrievable
 * with gwcrp_ctx_error(). Handles are opaque and owned by the caller via the
 * matching *_free function. A ctx must outlive the handles created with it
 * and must not be shared across threads.
 */
#ifndef GWCRP_C_H
#define GWCRP_C_H

#ifdef __cplusplus
extern "C" {
#endif

#define GWCRP_OK 0
#define GWCRP_ERR_INTERNAL 1
#define GWCRP_ERR_INPUT 2

typedef struct gwcrp_ctx gwcrp_ctx;
typedef struct gwcrp_dataset gwcrp_dataset;
typedef struct gwcrp_graph gwcrp_graph;
typedef struct gwcrp_result gwcrp_result;

const char* gwcrp_version(void);

gwcrp_ctx* gwcrp_ctx_new(void);
void gwcrp_ctx_free(gwcrp_ctx* ctx);
/* Message from the most recent failed call on this ctx; "" when none. */
const char* gwcrp_ctx_error(const gwcrp_ctx* ctx);

/* Survival CSV with header region,time,event,x1,...,xp */
gwcrp_dataset* gwcrp_dataset_load(gwcrp_ctx* ctx, const char* csv_path);
void gwcrp_dataset_free(gwcrp_dataset* dataset);
int gwcrp_dataset_region_count(const gwcrp_dataset* dataset);
int gwcrp_dataset_record_count(const gwcrp_dataset* dataset);
int gwcrp_dataset_covariate_count(const gwcrp_dataset* dataset);

/* Edge-list adjacency file, one "regionA regionB" edge per line */
gwcrp_graph* gwcrp_graph_load(gwcrp_ctx* ctx, const char* edge_path);
void gwcrp_graph_free(gwcrp_graph* graph);
int gwcrp_graph_region_count(const gwcrp_graph* graph);

/*
 * Fit one (h, J) model. config_json accepts the same keys as the CLI
 * effective config: cutpoints (array) or auto_cutpoints (int), h, alpha,
 * sigma0, iters, burnin, seed, kernel ("exp"|"sqexp").
 */
gwcrp_result* gwcrp_fit(gwcrp_ctx* ctx, const gwcrp_dataset* dataset,
                        const gwcrp_graph* graph, const char* config_json);
void gwcrp_result_free(gwcrp_result* result);
int gwcrp_result_k(const gwcrp_result* result);
double gwcrp_result_lpml(const gwcrp_result* result);
/* Copies up to cap labels (1-based clusters, graph region order) into out;
 * returns the region count. */
int gwcrp_result_labels(const gwcrp_result* result, int* out, int cap);
/* JSON document with the full posterior summary; owned by the result. */
const char* gwcrp_result_summary_json(const gwcrp_result* result);

/*
 * Run a full CLI-level command ("fit", "select", "simulate", "evaluate")
 * from an effective-config JSON string; writes output files into the
 * config's "out" directory. Returns GWCRP_OK, GWCRP_ERR_INPUT, or
 * GWCRP_ERR_INTERNAL.
 */
int gwcrp_run(gwcrp_ctx* ctx, const char* command, const char* config_json);

#ifdef __cplusplus
}
#endif

#endif
