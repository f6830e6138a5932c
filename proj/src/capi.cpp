// Copyright 2026 The softev Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "softev/softev.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "softev/data.hpp"
#include "softev/error.hpp"
#include "softev/experiment.hpp"
#include "softev/jeffrey.hpp"
#include "softev/methods.hpp"
#include "softev/variational.hpp"

struct softev_dataset {
  softev::SoftLabeledDataset ds;
};

struct softev_model {
  softev::Predictor predictor;
  softev::MethodKind kind;
};

namespace {

thread_local std::string g_last_error;

softev_status fail(softev_status status, const char* what) {
  g_last_error = what;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
softev_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return SOFTEV_OK;
  } catch (const softev::TrainingDivergedError& e) {
    return fail(SOFTEV_ERR_TRAINING_DIVERGED, e.what());
  } catch (const softev::DegenerateEvidenceError& e) {
    return fail(SOFTEV_ERR_DEGENERATE_EVIDENCE, e.what());
  } catch (const softev::DataError& e) {
    return fail(SOFTEV_ERR_DATA, e.what());
  } catch (const softev::IoError& e) {
    return fail(SOFTEV_ERR_IO, e.what());
  } catch (const softev::ShapeError& e) {
    return fail(SOFTEV_ERR_SHAPE, e.what());
  } catch (const softev::BoundsError& e) {
    return fail(SOFTEV_ERR_BOUNDS, e.what());
  } catch (const softev::DomainError& e) {
    return fail(SOFTEV_ERR_DOMAIN, e.what());
  } catch (const softev::NumericError& e) {
    return fail(SOFTEV_ERR_NUMERIC, e.what());
  } catch (const softev::UsageError& e) {
    return fail(SOFTEV_ERR_USAGE, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(SOFTEV_ERR_USAGE, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(SOFTEV_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(SOFTEV_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SOFTEV_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw softev::UsageError(what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

softev::JointTable make_joint(const double* joint, std::size_t alpha, std::size_t events) {
  require(joint != nullptr, "joint table pointer is null");
  return softev::JointTable(alpha, events, std::vector<double>(joint, joint + alpha * events));
}

softev::RunConfig parse_config(const char* config_json) {
  require(config_json != nullptr, "configuration is null");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw softev::UsageError(std::string("configuration is not valid JSON: ") + e.what());
  }
  return softev::RunConfig::from_json(j);
}

void copy_out(const softev::DiscreteDistribution& d, double* out) {
  require(out != nullptr, "output pointer is null");
  std::copy(d.probs().begin(), d.probs().end(), out);
}

}  // namespace

extern "C" {

const char* softev_version(void) { return SOFTEV_VERSION; }

const char* softev_last_error(void) { return g_last_error.c_str(); }

const char* softev_status_name(softev_status status) {
  switch (status) {
    case SOFTEV_OK: return "ok";
    case SOFTEV_ERR_USAGE: return "usage error";
    case SOFTEV_ERR_DATA: return "data error";
    case SOFTEV_ERR_IO: return "i/o error";
    case SOFTEV_ERR_DEGENERATE_EVIDENCE: return "degenerate evidence";
    case SOFTEV_ERR_SHAPE: return "shape error";
    case SOFTEV_ERR_BOUNDS: return "bounds error";
    case SOFTEV_ERR_DOMAIN: return "domain error";
    case SOFTEV_ERR_NUMERIC: return "numeric error";
    case SOFTEV_ERR_TRAINING_DIVERGED: return "training diverged";
    case SOFTEV_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int softev_exit_code(softev_status status) {
  if (status == SOFTEV_OK) return 0;
  if (status == SOFTEV_ERR_TRAINING_DIVERGED) return 3;
  return 2;
}

void softev_string_free(char* s) { std::free(s); }

softev_status softev_hard_condition(const double* joint, size_t alpha, size_t events, size_t event, double* out) {
  return guarded([&] { copy_out(softev::hard_condition(make_joint(joint, alpha, events), event), out); });
}

softev_status softev_jeffrey_update(const double* joint, size_t alpha, size_t events, const double* constraint,
                                    double* out) {
  return guarded([&] {
    require(constraint != nullptr, "constraint pointer is null");
    const auto table = make_joint(joint, alpha, events);
    const softev::DiscreteDistribution r(std::vector<double>(constraint, constraint + events));
    copy_out(softev::jeffrey_update(table, r).dist, out);
  });
}

softev_status softev_kl_oracle(const double* joint, size_t alpha, size_t events, const double* constraint,
                               size_t resolution, double* out) {
  return guarded([&] {
    require(constraint != nullptr, "constraint pointer is null");
    const auto table = make_joint(joint, alpha, events);
    const softev::DiscreteDistribution r(std::vector<double>(constraint, constraint + events));
    copy_out(softev::kl_minimizing_oracle(table, r, resolution), out);
  });
}

softev_status softev_kl_divergence(const double* q, const double* p, size_t n, double* out) {
  return guarded([&] {
    require(q && p && out, "null pointer argument");
    *out = softev::kl_divergence(std::span<const double>(q, n), std::span<const double>(p, n));
  });
}

softev_status softev_dataset_load_csv(const char* path, softev_dataset** out) {
  return guarded([&] {
    require(path && out, "null pointer argument");
    *out = new softev_dataset{softev::load_soft_csv(path)};
  });
}

softev_status softev_dataset_save_csv(const softev_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds && path, "null pointer argument");
    softev::save_soft_csv(ds->ds, path);
  });
}

softev_status softev_dataset_from_annotations(const char* path, size_t classes, softev_dataset** out) {
  return guarded([&] {
    require(path && out, "null pointer argument");
    *out = new softev_dataset{softev::aggregate_annotations(softev::load_annotations_csv(path), classes)};
  });
}

softev_status softev_dataset_synth_blobs(size_t classes, size_t dims, size_t per_class, double separation,
                                         uint64_t seed, softev_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "null pointer argument");
    softev::Rng rng(seed);
    *out = new softev_dataset{softev::synth_blobs(classes, dims, per_class, separation, rng)};
  });
}

softev_status softev_dataset_corrupt(const softev_dataset* ds, size_t annotators, double error_rate, uint64_t seed,
                                     softev_dataset** out) {
  return guarded([&] {
    require(ds && out, "null pointer argument");
    *out = new softev_dataset{softev::corrupt_labels(ds->ds, {annotators, error_rate, seed})};
  });
}

size_t softev_dataset_rows(const softev_dataset* ds) { return ds ? ds->ds.rows() : 0; }
size_t softev_dataset_dims(const softev_dataset* ds) { return ds ? ds->ds.dims() : 0; }
size_t softev_dataset_classes(const softev_dataset* ds) { return ds ? ds->ds.classes() : 0; }

softev_status softev_dataset_soft_labels(const softev_dataset* ds, double* out, size_t capacity) {
  return guarded([&] {
    require(ds && out, "null pointer argument");
    const auto v = ds->ds.soft_labels.values();
    if (capacity < v.size()) throw softev::BoundsError("output buffer too small for soft labels");
    std::copy(v.begin(), v.end(), out);
  });
}

softev_status softev_dataset_mean_top_vote_share(const softev_dataset* ds, double* out) {
  return guarded([&] {
    require(ds && out, "null pointer argument");
    *out = softev::mean_top_vote_share(ds->ds);
  });
}

void softev_dataset_free(softev_dataset* ds) { delete ds; }

softev_status softev_generate_data(const char* config_json, const char* train_path, const char* test_path) {
  return guarded([&] {
    require(train_path && test_path, "null output path");
    softev::generate_data(parse_config(config_json), train_path, test_path);
  });
}

softev_status softev_train(const char* config_json, softev_model** model, char** results_json) {
  return guarded([&] {
    require(results_json != nullptr, "null results pointer");
    auto outcome = softev::run_train(parse_config(config_json));
    char* text = copy_string(outcome.record.dump(2));
    if (model) *model = new softev_model{std::move(outcome.predictor), outcome.method};
    *results_json = text;
  });
}

softev_status softev_bench(const char* config_json, char** results_json) {
  return guarded([&] {
    require(results_json != nullptr, "null results pointer");
    *results_json = copy_string(softev::run_bench(parse_config(config_json)).dump(2));
  });
}

softev_status softev_model_load(const char* path, softev_model** out) {
  return guarded([&] {
    require(path && out, "null pointer argument");
    std::ifstream in(path);
    if (!in) throw softev::IoError(std::string("cannot open '") + path + "' for reading");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw softev::DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    auto predictor = softev::predictor_from_json(j);
    *out = new softev_model{std::move(predictor), softev::method_kind_from_string(j.at("method").get<std::string>())};
  });
}

softev_status softev_model_save(const softev_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "null pointer argument");
    std::ofstream out(path);
    if (!out) throw softev::IoError(std::string("cannot open '") + path + "' for writing");
    out << softev::predictor_to_json(model->predictor, model->kind).dump() << '\n';
    if (!out) throw softev::IoError(std::string("failed writing '") + path + "'");
  });
}

size_t softev_model_members(const softev_model* model) { return model ? model->predictor.members.size() : 0; }

size_t softev_model_classes(const softev_model* model) {
  return model && !model->predictor.members.empty() ? model->predictor.members.front().arch.output_dim() : 0;
}

softev_status softev_model_predict(const softev_model* model, const double* x, size_t rows, size_t dims,
                                   size_t samples, uint64_t seed, double* out) {
  return guarded([&] {
    require(model && x && out, "null pointer argument");
    softev::Tensor input({rows, dims}, std::vector<double>(x, x + rows * dims));
    softev::Rng rng(seed);
    const softev::Tensor probs = softev::predict(model->predictor, input, samples, rng);
    std::copy(probs.values().begin(), probs.values().end(), out);
  });
}

softev_status softev_model_weight_stats_csv(const softev_model* model, size_t member, char** out_csv) {
  return guarded([&] {
    require(model && out_csv, "null pointer argument");
    if (member >= model->predictor.members.size()) throw softev::BoundsError("member index out of range");
    const auto& m = model->predictor.members[member];
    std::ostringstream os;
    softev::write_weight_stats_csv(softev::export_weight_stats(m.theta, m.arch), os);
    *out_csv = copy_string(os.str());
  });
}

void softev_model_free(softev_model* model) { delete model; }

}  // extern "C"
