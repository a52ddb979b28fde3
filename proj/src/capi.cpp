/*
 * Copyright 2026 The isac-t2u Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "isac/isac.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "isac/assoc.hpp"
#include "isac/config.hpp"
#include "isac/runner.hpp"

struct isac_experiment {
  isac::ExperimentConfig cfg;
};

namespace {

thread_local std::string g_last_error;

isac_status from_code(isac::ErrorCode c) {
  switch (c) {
    case isac::ErrorCode::InvalidArgument: return ISAC_ERR_INVALID_ARGUMENT;
    case isac::ErrorCode::OutOfDuration: return ISAC_ERR_OUT_OF_DURATION;
    case isac::ErrorCode::DegenerateGeometry: return ISAC_ERR_DEGENERATE_GEOMETRY;
    case isac::ErrorCode::NoVisibleTarget: return ISAC_ERR_NO_VISIBLE_TARGET;
    case isac::ErrorCode::RangeAmbiguity: return ISAC_ERR_RANGE_AMBIGUITY;
    case isac::ErrorCode::SchemaMismatch: return ISAC_ERR_SCHEMA_MISMATCH;
    case isac::ErrorCode::Parse: return ISAC_ERR_PARSE;
    case isac::ErrorCode::DegenerateInterval: return ISAC_ERR_DEGENERATE_INTERVAL;
    case isac::ErrorCode::Io: return ISAC_ERR_IO;
  }
  return ISAC_ERR_INTERNAL;
}

template <class Fn>
isac_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ISAC_OK;
  } catch (const isac::Error& e) {
    g_last_error = e.what();
    return from_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return ISAC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ISAC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ISAC_ERR_INTERNAL;
  }
}

void need(bool ok, const char* what) {
  if (!ok) isac::fail(isac::ErrorCode::InvalidArgument, what);
}

}  // namespace

extern "C" {

ISAC_API const char* isac_version(void) { return "1.0.0"; }

ISAC_API const char* isac_status_string(isac_status status) {
  switch (status) {
    case ISAC_OK: return "Ok";
    case ISAC_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case ISAC_ERR_OUT_OF_DURATION: return "OutOfDuration";
    case ISAC_ERR_DEGENERATE_GEOMETRY: return "DegenerateGeometry";
    case ISAC_ERR_NO_VISIBLE_TARGET: return "NoVisibleTarget";
    case ISAC_ERR_RANGE_AMBIGUITY: return "RangeAmbiguity";
    case ISAC_ERR_SCHEMA_MISMATCH: return "SchemaMismatch";
    case ISAC_ERR_PARSE: return "Parse";
    case ISAC_ERR_DEGENERATE_INTERVAL: return "DegenerateInterval";
    case ISAC_ERR_IO: return "Io";
    case ISAC_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

ISAC_API const char* isac_last_error(void) { return g_last_error.c_str(); }

ISAC_API isac_status isac_experiment_create(isac_experiment** out) {
  return guarded([&] {
    need(out != nullptr, "output handle is null");
    *out = new isac_experiment{};
  });
}

ISAC_API isac_status isac_experiment_from_file(const char* path, isac_experiment** out) {
  return guarded([&] {
    need(out != nullptr && path != nullptr, "null argument");
    *out = nullptr;
    auto cfg = isac::load_config(path);
    *out = new isac_experiment{std::move(cfg)};
  });
}

ISAC_API isac_status isac_experiment_from_string(const char* text, isac_experiment** out) {
  return guarded([&] {
    need(out != nullptr && text != nullptr, "null argument");
    *out = nullptr;
    auto cfg = isac::parse_config(text);
    *out = new isac_experiment{std::move(cfg)};
  });
}

ISAC_API void isac_experiment_destroy(isac_experiment* exp) { delete exp; }

ISAC_API isac_status isac_experiment_set_option(isac_experiment* exp, const char* key,
                                                const char* value) {
  return guarded([&] {
    need(exp && key && value, "null argument");
    isac::ExperimentConfig next = exp->cfg;
    isac::apply_option(next, key, value);
    exp->cfg = std::move(next);
  });
}

ISAC_API isac_status isac_experiment_set_seed(isac_experiment* exp, uint64_t seed) {
  return guarded([&] {
    need(exp != nullptr, "null experiment");
    exp->cfg.seed = seed;
  });
}

ISAC_API isac_status isac_experiment_get_seed(const isac_experiment* exp, uint64_t* seed) {
  return guarded([&] {
    need(exp && seed, "null argument");
    *seed = exp->cfg.seed;
  });
}

ISAC_API isac_status isac_experiment_spec_hash(const isac_experiment* exp, char* buf, size_t len) {
  return guarded([&] {
    need(exp && buf, "null argument");
    std::string h = exp->cfg.spec_hash();
    need(len > h.size(), "buffer too small for the spec hash");
    std::memcpy(buf, h.c_str(), h.size() + 1);
  });
}

ISAC_API isac_status isac_experiment_validate(const isac_experiment* exp) {
  return guarded([&] {
    need(exp != nullptr, "null experiment");
    exp->cfg.validate();
  });
}

ISAC_API isac_status isac_command_from_name(const char* name, isac_command* out) {
  return guarded([&] {
    need(name && out, "null argument");
    static const struct {
      const char* name;
      isac_command cmd;
    } table[] = {{"simulate", ISAC_CMD_SIMULATE},         {"detect", ISAC_CMD_DETECT},
                 {"associate", ISAC_CMD_ASSOCIATE},       {"eval-metrics", ISAC_CMD_EVAL_METRICS},
                 {"sweep-snr", ISAC_CMD_SWEEP_SNR},       {"sweep-clutter", ISAC_CMD_SWEEP_CLUTTER},
                 {"sweep-matrix", ISAC_CMD_SWEEP_MATRIX}};
    for (const auto& e : table)
      if (std::strcmp(e.name, name) == 0) {
        *out = e.cmd;
        return;
      }
    isac::fail(isac::ErrorCode::InvalidArgument, std::string("unknown command '") + name + "'");
  });
}

ISAC_API isac_status isac_run(const isac_experiment* exp, isac_command cmd,
                              const isac_run_options* options) {
  return guarded([&] {
    need(exp != nullptr, "null experiment");
    isac::RunOptions opt;
    if (options) {
      if (options->out_dir) opt.out_dir = options->out_dir;
      opt.threads = options->threads < 1 ? 1 : options->threads;
      opt.dump_images = options->dump_images != 0;
      if (options->detections_path) opt.detections_path = options->detections_path;
    }
    const auto& cfg = exp->cfg;
    switch (cmd) {
      case ISAC_CMD_SIMULATE: isac::run_simulate(cfg, opt); return;
      case ISAC_CMD_DETECT: isac::run_detect(cfg, opt); return;
      case ISAC_CMD_ASSOCIATE: isac::run_associate(cfg, opt); return;
      case ISAC_CMD_EVAL_METRICS: isac::run_eval_metrics(cfg, opt); return;
      case ISAC_CMD_SWEEP_SNR: isac::run_sweep_snr(cfg, opt); return;
      case ISAC_CMD_SWEEP_CLUTTER: isac::run_sweep_clutter(cfg, opt); return;
      case ISAC_CMD_SWEEP_MATRIX: isac::run_sweep_matrix(cfg, opt); return;
    }
    isac::fail(isac::ErrorCode::InvalidArgument, "unknown command");
  });
}

ISAC_API isac_status isac_solve_assignment(const double* cost, size_t rows, size_t cols,
                                           const double* gate, int64_t* row_to_col,
                                           double* total_cost) {
  return guarded([&] {
    need((cost != nullptr || rows * cols == 0) && (row_to_col != nullptr || rows == 0),
         "null argument");
    isac::RMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r)
      for (size_t c = 0; c < cols; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cost[r * cols + c];
    std::optional<double> g;
    if (gate) g = *gate;
    isac::Assignment a = isac::solve_assignment(m, g);
    for (size_t r = 0; r < rows; ++r) row_to_col[r] = -1;
    for (auto [r, c] : a.pairs) row_to_col[r] = static_cast<int64_t>(c);
    if (total_cost) *total_cost = a.total_cost;
  });
}

ISAC_API isac_status isac_cce_cost(const double* logits_h, size_t n_h, const double* logits_v,
                                   size_t n_v, size_t f_h, size_t f_v, double* out) {
  return guarded([&] {
    need(logits_h && logits_v && out, "null argument");
    need(n_h > 0 && n_v > 0, "empty logit vector");
    need(f_h < n_h && f_v < n_v, "beam index out of range");
    std::vector<double> lh(logits_h, logits_h + n_h), lv(logits_v, logits_v + n_v);
    std::vector<double> yh(n_h, 0.0), yv(n_v, 0.0);
    yh[f_h] = 1.0;
    yv[f_v] = 1.0;
    *out = isac::cce_cost(yh, yv, lh, lv);
  });
}

}  // extern "C"
