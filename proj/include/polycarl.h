#ifndef POLYCARL_H
#define POLYCARL_H

#include <stddef.h>

#if defined(_WIN32)
#define PCL_API __declspec(dllexport)
#else
#define PCL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcl_status {
  PCL_OK = 0,
  PCL_ASSERTION = 1, /* a study ran but a hard assertion failed */
  PCL_USAGE = 2,     /* bad config, key, value or argument */
  PCL_RESOURCE = 3,  /* refused: the request exceeds the desk budget */
  PCL_IO = 4,
  PCL_INTERNAL = 5
} pcl_status;

typedef struct pcl_context pcl_context;

PCL_API const char* pcl_version(void);
PCL_API size_t pcl_study_count(void);
PCL_API const char* pcl_study_name(size_t index); /* NULL past the end */

PCL_API pcl_context* pcl_context_new(void);
PCL_API void pcl_context_free(pcl_context* ctx);

/* Config text is `key = value` lines with optional [section] headers. */
PCL_API pcl_status pcl_config_load(pcl_context* ctx, const char* path);
PCL_API pcl_status pcl_config_parse(pcl_context* ctx, const char* text);
PCL_API pcl_status pcl_config_set(pcl_context* ctx, const char* key, const char* value);

/* Runs `study` (NULL keeps the configured name) and writes its artifacts. */
PCL_API pcl_status pcl_run(pcl_context* ctx, const char* study);

/* Valid until the next call on the same context. */
PCL_API const char* pcl_last_error(const pcl_context* ctx);
PCL_API const char* pcl_error_field(const pcl_context* ctx);
PCL_API double pcl_resource_estimate(const pcl_context* ctx);
PCL_API const char* pcl_summary_json(const pcl_context* ctx);
PCL_API size_t pcl_artifact_count(const pcl_context* ctx);
PCL_API const char* pcl_artifact_path(const pcl_context* ctx, size_t index);

#ifdef __cplusplus
}
#endif

#endif
