/* C interface to the hawkesfield library. Opaque handles, status codes,
   thread-local error text. Everything the command-line tool needs. */
#ifndef HAWKESFIELD_H
#define HAWKESFIELD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HF_API __declspec(dllexport)
#else
#define HF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  HF_OK = 0,
  HF_MISMATCH = 1,        /* verify found a problem */
  HF_CONFIG_ERROR = 2,
  HF_NUMERICAL_ERROR = 3, /* non-convergence, explosion, resolution */
  HF_INTERNAL_ERROR = 4,
  HF_INVALID_ARGUMENT = 5
} hf_status;

typedef struct hf_config hf_config;

HF_API const char* hf_version(void);

/* Message of the last failing call on this thread; "" if none. */
HF_API const char* hf_last_error(void);

HF_API hf_status hf_config_load(const char* path, hf_config** out);
HF_API hf_status hf_config_parse(const char* json_text, hf_config** out);
HF_API void hf_config_free(hf_config* config);

HF_API hf_status hf_config_set_seed(hf_config* config, uint64_t seed);
HF_API hf_status hf_config_seed(const hf_config* config, uint64_t* seed);
HF_API hf_status hf_config_hash(const hf_config* config, uint64_t* hash);
/* Output directory named in the config, or "" */
HF_API const char* hf_config_output(const hf_config* config);

/* command: simulate, solve-limit, quantize, converge-study, chaos-study */
HF_API hf_status hf_run(const hf_config* config, const char* command, const char* out_dir,
                        unsigned jobs);

/* config may be NULL. Problems are joined in hf_last_error(). */
HF_API hf_status hf_verify(const char* out_dir, const hf_config* config);

HF_API hf_status hf_g_bound(size_t d, double r, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif
