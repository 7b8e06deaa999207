/* C interface to the tensorrl library.
 *
 * Objects are opaque handles created by *_create / *_load / computation calls
 * and released with the matching *_free. Every fallible call returns a
 * trl_status; on failure trl_last_error() describes the problem (the message
 * is per thread and valid until the next call on that thread). */
#ifndef TENSORRL_H
#define TENSORRL_H

#include <stddef.h>
#include <stdint.h>

#if defined(TENSORRL_BUILDING_LIBRARY)
#define TRL_API __attribute__((visibility("default")))
#else
#define TRL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum trl_status {
    TRL_OK = 0,
    TRL_ERR_INVALID_ARGUMENT = 1,
    TRL_ERR_SHAPE = 2,
    TRL_ERR_IO = 3,
    TRL_ERR_FORMAT = 4,
    TRL_ERR_DEGENERATE = 5,
    TRL_ERR_NOT_CONVERGED = 6,
    TRL_ERR_INTERNAL = 7
} trl_status;

typedef struct trl_tensor trl_tensor;
typedef struct trl_cp trl_cp;
typedef struct trl_mdp trl_mdp;
typedef struct trl_experiment_config trl_experiment_config;

typedef struct trl_decomp_config {
    size_t rank;
    double power_tolerance;
    size_t power_max_iters;
    size_t altmin_max_sweeps;
    double altmin_tolerance;
    uint64_t seed;
    size_t max_restarts;
} trl_decomp_config;

TRL_API const char* trl_version(void);
TRL_API const char* trl_last_error(void);
TRL_API const char* trl_status_name(trl_status status);

/* Tensors. `data` is row-major and may be NULL for a zero tensor. */
TRL_API trl_status trl_tensor_create(const size_t* shape, size_t order, const double* data, trl_tensor** out);
TRL_API trl_status trl_tensor_load(const char* path, trl_tensor** out);
TRL_API trl_status trl_tensor_save(const trl_tensor* t, const char* path);
TRL_API size_t trl_tensor_order(const trl_tensor* t);
TRL_API size_t trl_tensor_size(const trl_tensor* t);
/* Copies order() dimensions into `shape`. */
TRL_API void trl_tensor_shape(const trl_tensor* t, size_t* shape);
TRL_API const double* trl_tensor_data(const trl_tensor* t);
TRL_API void trl_tensor_free(trl_tensor* t);

/* Decomposition and completion. */
TRL_API void trl_decomp_config_default(trl_decomp_config* cfg);
TRL_API trl_status trl_decompose(const trl_tensor* t, const trl_decomp_config* cfg, trl_cp** out);
/* `mask` holds 0/1 entries with the shape of `observed`. */
TRL_API trl_status trl_complete(const trl_tensor* observed, const trl_tensor* mask, const trl_decomp_config* cfg,
                                trl_cp** out);

TRL_API trl_status trl_cp_load(const char* path, trl_cp** out);
TRL_API trl_status trl_cp_save(const trl_cp* cp, const char* path);
TRL_API size_t trl_cp_rank(const trl_cp* cp);
TRL_API size_t trl_cp_order(const trl_cp* cp);
/* Copies rank() weights into `weights`. */
TRL_API void trl_cp_weights(const trl_cp* cp, double* weights);
TRL_API trl_status trl_cp_reconstruct(const trl_cp* cp, trl_tensor** out);
TRL_API void trl_cp_free(trl_cp* cp);

/* MDPs. `experiment` is "rank5" or "degenerate". */
TRL_API trl_status trl_mdp_generate(const char* experiment, uint64_t seed, double discount, trl_mdp** out);
TRL_API trl_status trl_mdp_load(const char* dir, trl_mdp** out);
TRL_API trl_status trl_mdp_save(const trl_mdp* mdp, const char* dir);
TRL_API size_t trl_mdp_states(const trl_mdp* mdp);
TRL_API size_t trl_mdp_joint_actions(const trl_mdp* mdp);
TRL_API void trl_mdp_free(trl_mdp* mdp);

/* Experiments. A config starts from the defaults of `experiment`; keys are
 * those of the config file format. */
TRL_API trl_status trl_experiment_config_create(const char* experiment, trl_experiment_config** out);
TRL_API trl_status trl_experiment_config_load(trl_experiment_config* cfg, const char* path);
TRL_API trl_status trl_experiment_config_set(trl_experiment_config* cfg, const char* key, const char* value);
TRL_API void trl_experiment_config_free(trl_experiment_config* cfg);
/* Writes metrics_run{i}.csv, metrics_mean.csv and manifest.txt to out_dir.
 * `dump_dir` may be NULL. */
TRL_API trl_status trl_experiment_run(const trl_experiment_config* cfg, const char* out_dir, const char* dump_dir);

#ifdef __cplusplus
}
#endif

#endif
