#include "mhla/mhla.h"

#include <memory>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/explore.hpp"
#include "core/model.hpp"

using namespace mhla;

struct mhla_model {
  AppModel model;
  Linearized lin;
};

struct mhla_platform {
  PlatformSpec platform;
};

struct mhla_result {
  std::vector<TradeoffPoint> points;
  std::string csv;
  std::vector<std::string> energy;
  std::vector<std::string> schedule_json;
  std::vector<std::string> trace_csv;
  std::vector<std::string> intervals_csv;
};

namespace {

thread_local std::string g_last_error;

mhla_status fail(mhla_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <typename Fn>
mhla_status guarded(Fn&& fn) {
  try {
    fn();
    return MHLA_OK;
  } catch (const InputError& e) {
    return fail(MHLA_ERR_INPUT, e.what());
  } catch (const InternalError& e) {
    return fail(MHLA_ERR_INTERNAL, e.what());
  } catch (const std::exception& e) {
    return fail(MHLA_ERR_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* mhla_version(void) { return "1.0.0"; }

const char* mhla_last_error(void) { return g_last_error.c_str(); }

mhla_status mhla_model_parse(const char* json_text, mhla_model** out) {
  if (!json_text || !out) return fail(MHLA_ERR_INPUT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<mhla_model>();
    handle->model = parse_model(json_text);
    handle->lin = linearize(handle->model);
    *out = handle.release();
  });
}

void mhla_model_free(mhla_model* model) { delete model; }

mhla_status mhla_platform_parse(const char* json_text, mhla_platform** out) {
  if (!json_text || !out) return fail(MHLA_ERR_INPUT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<mhla_platform>();
    handle->platform = parse_platform(json_text);
    *out = handle.release();
  });
}

void mhla_platform_free(mhla_platform* platform) { delete platform; }

mhla_status mhla_explore_run(const mhla_model* model, const mhla_platform* platform,
                             const uint64_t* capacities, size_t capacity_count,
                             const mhla_explore_options* options, mhla_result** out) {
  if (!model || !platform || !out || (!capacities && capacity_count > 0))
    return fail(MHLA_ERR_INPUT, "null argument");
  *out = nullptr;
  return guarded([&] {
    ExploreOptions opts;
    if (options) {
      opts.te = options->te != 0;
      opts.oracle = options->oracle != 0;
      opts.with_trace = options->with_trace != 0;
    }
    std::vector<Bytes> caps(capacities, capacities + capacity_count);
    auto handle = std::make_unique<mhla_result>();
    handle->points = sweep(model->model, model->lin, platform->platform, caps, opts);
    pareto(handle->points);
    handle->csv = points_to_csv(handle->points);
    for (const TradeoffPoint& p : handle->points) {
      handle->energy.push_back(p.energy_pj.to_decimal_string());
      handle->schedule_json.push_back(point_detail_json(model->model, platform->platform, p));
      handle->trace_csv.push_back(opts.with_trace ? trace_to_csv(p.sim.trace) : std::string());
      handle->intervals_csv.push_back(
          point_intervals_csv(model->model, model->lin, platform->platform, p));
    }
    *out = handle.release();
  });
}

void mhla_result_free(mhla_result* result) { delete result; }

size_t mhla_result_point_count(const mhla_result* result) {
  return result ? result->points.size() : 0;
}

mhla_status mhla_result_point(const mhla_result* result, size_t index, mhla_point* out) {
  if (!result || !out || index >= result->points.size())
    return fail(MHLA_ERR_INPUT, "bad point index");
  const TradeoffPoint& p = result->points[index];
  out->capacity = p.capacity;
  out->cycles_no_te = p.cycles_no_te;
  out->cycles_te = p.cycles_te;
  out->energy_pj = result->energy[index].c_str();
  out->peak_bytes = p.peak_bytes;
  out->pareto = p.pareto ? 1 : 0;
  return MHLA_OK;
}

const char* mhla_result_csv(const mhla_result* result) {
  return result ? result->csv.c_str() : nullptr;
}

const char* mhla_result_schedule_json(const mhla_result* result, size_t index) {
  if (!result || index >= result->schedule_json.size()) return nullptr;
  return result->schedule_json[index].c_str();
}

const char* mhla_result_trace_csv(const mhla_result* result, size_t index) {
  if (!result || index >= result->trace_csv.size()) return nullptr;
  if (result->trace_csv[index].empty()) return nullptr;
  return result->trace_csv[index].c_str();
}

const char* mhla_result_intervals_csv(const mhla_result* result, size_t index) {
  if (!result || index >= result->intervals_csv.size()) return nullptr;
  return result->intervals_csv[index].c_str();
}

}  // extern "C"
