#include "polycarl.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "polycarl/studies.hpp"

struct pcl_context {
  polycarl::ExperimentConfig config;
  std::string error;
  std::string field;
  double estimate = 0;
  std::string summary;
  std::vector<std::string> artifacts;
};

namespace {

void clear(pcl_context* ctx) {
  ctx->error.clear();
  ctx->field.clear();
  ctx->estimate = 0;
}

template <class F>
pcl_status guarded(pcl_context* ctx, F&& body) {
  if (!ctx) return PCL_USAGE;
  clear(ctx);
  try {
    return body();
  } catch (const polycarl::ConfigError& e) {
    ctx->field = e.field();
    ctx->error = e.what();
    return PCL_USAGE;
  } catch (const polycarl::ResourceLimit& e) {
    ctx->error = e.what();
    ctx->estimate = e.estimate();
    return PCL_RESOURCE;
  } catch (const polycarl::InvalidInput& e) {
    ctx->error = e.what();
    return PCL_USAGE;
  } catch (const polycarl::Error& e) {
    ctx->error = e.what();
    return PCL_IO;
  } catch (const std::bad_alloc&) {
    ctx->error = "out of memory";
    return PCL_RESOURCE;
  } catch (const std::exception& e) {
    ctx->error = e.what();
    return PCL_INTERNAL;
  } catch (...) {
    ctx->error = "unknown failure";
    return PCL_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* pcl_version(void) { return polycarl::kVersionTag; }

size_t pcl_study_count(void) { return polycarl::study_names().size(); }

const char* pcl_study_name(size_t index) {
  const auto& names = polycarl::study_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

pcl_context* pcl_context_new(void) { return new (std::nothrow) pcl_context(); }

void pcl_context_free(pcl_context* ctx) { delete ctx; }

pcl_status pcl_config_load(pcl_context* ctx, const char* path) {
  return guarded(ctx, [&] {
    if (!path) throw polycarl::ConfigError("--config", "no path given");
    ctx->config = polycarl::load_config(path);
    return PCL_OK;
  });
}

pcl_status pcl_config_parse(pcl_context* ctx, const char* text) {
  return guarded(ctx, [&] {
    ctx->config = polycarl::parse_config(text ? text : "");
    return PCL_OK;
  });
}

pcl_status pcl_config_set(pcl_context* ctx, const char* key, const char* value) {
  return guarded(ctx, [&] {
    if (!key || !value) throw polycarl::ConfigError(key ? key : "", "key and value are required");
    polycarl::set_config_value(ctx->config, key, value);
    return PCL_OK;
  });
}

pcl_status pcl_run(pcl_context* ctx, const char* study) {
  return guarded(ctx, [&] {
    ctx->summary.clear();
    ctx->artifacts.clear();
    polycarl::ExperimentConfig config = ctx->config;
    if (study) config.study = study;
    const auto resolved = polycarl::resolve(config);
    const auto result = polycarl::run_study(resolved);
    ctx->summary = polycarl::to_json(result, resolved);
    ctx->artifacts = polycarl::write_artifacts(result, resolved);
    if (!result.pass()) {
      ctx->error = result.failures.front();
      return PCL_ASSERTION;
    }
    return PCL_OK;
  });
}

const char* pcl_last_error(const pcl_context* ctx) { return ctx ? ctx->error.c_str() : "null context"; }

const char* pcl_error_field(const pcl_context* ctx) { return ctx ? ctx->field.c_str() : ""; }

double pcl_resource_estimate(const pcl_context* ctx) { return ctx ? ctx->estimate : 0.0; }

const char* pcl_summary_json(const pcl_context* ctx) { return ctx ? ctx->summary.c_str() : ""; }

size_t pcl_artifact_count(const pcl_context* ctx) { return ctx ? ctx->artifacts.size() : 0; }

const char* pcl_artifact_path(const pcl_context* ctx, size_t index) {
  return ctx && index < ctx->artifacts.size() ? ctx->artifacts[index].c_str() : nullptr;
}

}  // extern "C"
