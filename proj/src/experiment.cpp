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


#include "softev/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "softev/error.hpp"

namespace softev {

using nlohmann::json;

namespace {

std::size_t method_index(MethodKind kind) {
  for (std::size_t i = 0; i < std::size(kAllMethods); ++i)
    if (kAllMethods[i] == kind) return i;
  return 0;
}

std::string prior_kind_name(PriorSpec::Kind k) {
  return k == PriorSpec::Kind::single_gaussian ? "gaussian" : "mixture";
}

PriorSpec::Kind prior_kind_from_string(const std::string& s) {
  if (s == "gaussian") return PriorSpec::Kind::single_gaussian;
  if (s == "mixture") return PriorSpec::Kind::mixture;
  throw UsageError("unknown prior kind '" + s + "' (expected gaussian or mixture)");
}

std::string scope_name(ResampleScope s) { return s == ResampleScope::per_sample ? "per_sample" : "per_batch"; }

ResampleScope scope_from_string(const std::string& s) {
  if (s == "per_sample") return ResampleScope::per_sample;
  if (s == "per_batch") return ResampleScope::per_batch;
  throw UsageError("unknown resample scope '" + s + "' (expected per_sample or per_batch)");
}

json synth_to_json(const SynthSpec& s) {
  return {{"classes", s.classes},           {"dims", s.dims},           {"train_per_class", s.train_per_class},
          {"test_per_class", s.test_per_class}, {"separation", s.separation}, {"annotators", s.annotators},
          {"error_rate", s.error_rate}};
}

SynthSpec synth_from_json(const json& j) {
  SynthSpec s;
  for (const auto& [key, value] : j.items()) {
    if (key == "classes") s.classes = value.get<std::size_t>();
    else if (key == "dims") s.dims = value.get<std::size_t>();
    else if (key == "train_per_class") s.train_per_class = value.get<std::size_t>();
    else if (key == "test_per_class") s.test_per_class = value.get<std::size_t>();
    else if (key == "separation") s.separation = value.get<double>();
    else if (key == "annotators") s.annotators = value.get<std::size_t>();
    else if (key == "error_rate") s.error_rate = value.get<double>();
    else throw UsageError("unknown synth key '" + key + "'");
  }
  return s;
}

json summary_to_json(const MetricSummary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"per_repeat", s.per_repeat}};
}

json tensor_set_to_json(const ParameterSet& set) {
  json out = json::array();
  for (const auto& e : set)
    out.push_back({{"name", e.name},
                   {"shape", e.value.shape()},
                   {"values", std::vector<double>(e.value.values().begin(), e.value.values().end())}});
  return out;
}

ParameterSet tensor_set_from_json(const json& j) {
  ParameterSet set;
  for (const auto& e : j)
    set.add(e.at("name").get<std::string>(),
            Tensor(e.at("shape").get<std::vector<std::size_t>>(), e.at("values").get<std::vector<double>>()));
  return set;
}

std::string mean_std(const json& summary, double scale) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", summary.at("mean").get<double>() * scale,
                summary.at("std").get<double>() * scale);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  if (methods.empty()) throw UsageError("no methods configured");
  if (K == 0) throw UsageError("K must be at least 1");
  if (repeats == 0) throw UsageError("repeats must be at least 1");
  if (pred_samples == 0) throw UsageError("pred_samples must be at least 1");
  for (std::size_t h : hidden)
    if (h == 0) throw UsageError("hidden layer widths must be positive");
  train.validate();
  const bool files = train_path || test_path;
  if (files && synth) throw UsageError("give either data files or a synthetic spec, not both");
  if (files && !(train_path && test_path)) throw UsageError("both train and test data files are required");
  if (!files && !synth) throw UsageError("no data source: give data files or a synthetic spec");
  if (synth) {
    if (synth->classes < 2) throw UsageError("synthetic data needs at least two classes");
    if (synth->dims == 0 || synth->train_per_class == 0 || synth->test_per_class == 0)
      throw UsageError("synthetic dims and per-class counts must be positive");
    if (!(synth->separation >= 0.0)) throw UsageError("synthetic separation must be non-negative");
    if (synth->annotators == 0) throw UsageError("corruption needs at least one annotator");
    if (!(synth->error_rate >= 0.0 && synth->error_rate < 1.0)) throw UsageError("error rate must lie in [0, 1)");
  }
}

json RunConfig::to_json() const {
  json j;
  std::vector<std::string> names;
  for (MethodKind m : methods) names.push_back(softev::to_string(m));
  j["methods"] = names;
  j["k"] = K;
  j["hidden"] = hidden;
  j["epochs"] = train.epochs;
  j["batch_size"] = train.batch_size;
  j["mc_samples"] = train.mc_samples;
  j["lr"] = train.lr;
  j["momentum"] = train.momentum;
  j["prior"] = {{"kind", prior_kind_name(train.prior.kind)},
                {"sd1", train.prior.sd1},
                {"sd2", train.prior.sd2},
                {"mix", train.prior.mix}};
  j["resample_scope"] = scope_name(train.resample_scope);
  j["initial_sd"] = train.initial_sd;
  j["pred_samples"] = pred_samples;
  j["train_data"] = train_path ? json(train_path->string()) : json(nullptr);
  j["test_data"] = test_path ? json(test_path->string()) : json(nullptr);
  j["synth"] = synth ? synth_to_json(*synth) : json(nullptr);
  j["repeats"] = repeats;
  j["eval_labels"] = softev::to_string(eval_labels);
  j["bag_labels"] = softev::to_string(bag_labels);
  j["parallel"] = parallel;
  j["seed"] = seed;
  j["weight_stats_dir"] = weight_stats_dir ? json(weight_stats_dir->string()) : json(nullptr);
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw UsageError("run configuration must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "methods") {
        c.methods.clear();
        for (const auto& m : v) c.methods.push_back(method_kind_from_string(m.get<std::string>()));
      } else if (key == "method") {
        c.methods = {method_kind_from_string(v.get<std::string>())};
      } else if (key == "k") {
        c.K = v.get<std::size_t>();
      } else if (key == "hidden") {
        c.hidden = v.get<std::vector<std::size_t>>();
      } else if (key == "epochs") {
        c.train.epochs = v.get<std::size_t>();
      } else if (key == "batch_size") {
        c.train.batch_size = v.get<std::size_t>();
      } else if (key == "mc_samples") {
        c.train.mc_samples = v.get<std::size_t>();
      } else if (key == "lr") {
        c.train.lr = v.get<double>();
      } else if (key == "momentum") {
        c.train.momentum = v.get<double>();
      } else if (key == "prior") {
        for (const auto& [pk, pv] : v.items()) {
          if (pk == "kind") c.train.prior.kind = prior_kind_from_string(pv.get<std::string>());
          else if (pk == "sd1") c.train.prior.sd1 = pv.get<double>();
          else if (pk == "sd2") c.train.prior.sd2 = pv.get<double>();
          else if (pk == "mix") c.train.prior.mix = pv.get<double>();
          else throw UsageError("unknown prior key '" + pk + "'");
        }
      } else if (key == "resample_scope") {
        c.train.resample_scope = scope_from_string(v.get<std::string>());
      } else if (key == "initial_sd") {
        c.train.initial_sd = v.get<double>();
      } else if (key == "pred_samples") {
        c.pred_samples = v.get<std::size_t>();
      } else if (key == "train_data") {
        if (!v.is_null()) c.train_path = v.get<std::string>();
      } else if (key == "test_data") {
        if (!v.is_null()) c.test_path = v.get<std::string>();
      } else if (key == "synth") {
        if (!v.is_null()) c.synth = synth_from_json(v);
      } else if (key == "repeats") {
        c.repeats = v.get<std::size_t>();
      } else if (key == "eval_labels") {
        c.eval_labels = eval_label_convention_from_string(v.get<std::string>());
      } else if (key == "bag_labels") {
        c.bag_labels = bag_labels_from_string(v.get<std::string>());
      } else if (key == "parallel") {
        c.parallel = v.get<bool>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "weight_stats_dir") {
        if (!v.is_null()) c.weight_stats_dir = v.get<std::string>();
      } else {
        throw UsageError("unknown configuration key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad configuration value: ") + e.what());
  }
  return c;
}

DataSplit prepare_data(const RunConfig& config, std::uint64_t repeat_seed) {
  if (config.synth) {
    const SynthSpec& s = *config.synth;
    Rng train_rng = make_rng(repeat_seed, 100), test_rng = make_rng(repeat_seed, 101);
    SoftLabeledDataset train = synth_blobs(s.classes, s.dims, s.train_per_class, s.separation, train_rng);
    SoftLabeledDataset test = synth_blobs(s.classes, s.dims, s.test_per_class, s.separation, test_rng);
    train = corrupt_labels(train, {s.annotators, s.error_rate, derive_seed(repeat_seed, 102)});
    test = corrupt_labels(test, {s.annotators, s.error_rate, derive_seed(repeat_seed, 103)});
    test.split = Split::test;
    return {std::move(train), std::move(test)};
  }
  DataSplit split{load_soft_csv(*config.train_path, Split::train), load_soft_csv(*config.test_path, Split::test)};
  if (split.train.rows() == 0 || split.test.rows() == 0) throw DataError("train and test data must be nonempty");
  if (split.train.dims() != split.test.dims() || split.train.classes() != split.test.classes())
    throw DataError("train and test files disagree on feature or class count");
  return split;
}

Architecture architecture_for(const RunConfig& config, const SoftLabeledDataset& train) {
  std::vector<std::size_t> widths{train.dims()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(train.classes());
  return Architecture(std::move(widths));
}

RepeatMetrics evaluate(const Predictor& predictor, const SoftLabeledDataset& test, std::size_t samples, Rng& rng,
                       EvalLabelConvention convention) {
  const auto labels = evaluation_labels(test, convention);
  const PredictionResult pred = predict_with_labels(predictor, test.features, samples, rng);
  return {accuracy(pred.labels, labels), nll(pred.probs, labels), brier(pred.probs, test.soft_labels)};
}

namespace {

MethodSpec method_spec(const RunConfig& config, MethodKind kind, std::uint64_t repeat_seed,
                       std::vector<std::string>& warnings) {
  MethodSpec spec;
  spec.kind = kind;
  spec.K = config.K;
  spec.train = config.train;
  spec.train.seed = derive_seed(repeat_seed, 200 + method_index(kind));
  spec.bag_labels = config.bag_labels;
  spec.parallel = config.parallel;
  for (auto& w : normalize(spec))
    if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(std::move(w));
  return spec;
}

void write_weight_stats(const RunConfig& config, const Predictor& p, MethodKind kind, std::size_t repeat) {
  if (!config.weight_stats_dir) return;
  std::filesystem::create_directories(*config.weight_stats_dir);
  for (std::size_t m = 0; m < p.members.size(); ++m) {
    const auto path = *config.weight_stats_dir /
                      (to_string(kind) + "_r" + std::to_string(repeat) + "_m" + std::to_string(m) + ".csv");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_weight_stats_csv(export_weight_stats(p.members[m].theta, p.members[m].arch), out);
  }
}

json base_record(const RunConfig& config, const char* command) {
  json r;
  r["library"] = "softev";
  r["library_version"] = SOFTEV_VERSION;
  r["command"] = command;
  r["config"] = config.to_json();
  r["bag_label_mode"] = to_string(config.bag_labels);
  r["seed_derivation"] =
      "repeat seed = master + r; method training seed = derive_seed(repeat seed, 200 + method index), member k "
      "adds k; prediction rng = make_rng(repeat seed, 300 + method index)";
  return r;
}

json method_entry(MethodKind kind, std::size_t K) {
  return {{"method", to_string(kind)}, {"name", display_name(kind)}, {"k", K}};
}

void fill_metrics(json& entry, const std::vector<RepeatMetrics>& ok, const std::vector<double>& sds,
                  std::size_t classes) {
  if (ok.empty()) {
    entry["status"] = "failed";
    return;
  }
  const MetricsReport report = aggregate(ok, classes);
  entry["accuracy"] = summary_to_json(report.accuracy);
  entry["nll"] = summary_to_json(report.nll);
  entry["brier"] = summary_to_json(report.brier);
  entry["mean_posterior_sd"] = summary_to_json(summarize(sds));
  entry["repeats_ok"] = report.repeats;
  entry["classes"] = report.classes;
  entry["table"] = {{"accuracy_pct", mean_std(entry["accuracy"], 100.0)},
                    {"nll_x10", mean_std(entry["nll"], 10.0)},
                    {"brier_x1e3", mean_std(entry["brier"], 1000.0)}};
}

}  // namespace

TrainOutcome run_train(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const MethodKind kind = config.methods.front();
  const std::uint64_t repeat_seed = config.seed;
  const DataSplit data = prepare_data(config, repeat_seed);
  const Architecture arch = architecture_for(config, data.train);

  std::vector<std::string> warnings;
  const MethodSpec spec = method_spec(config, kind, repeat_seed, warnings);
  Predictor predictor = train_method(data.train, arch, spec);
  Rng rng = make_rng(repeat_seed, 300 + method_index(kind));
  const RepeatMetrics m = evaluate(predictor, data.test, config.pred_samples, rng, config.eval_labels);
  write_weight_stats(config, predictor, kind, 0);

  json record = base_record(config, "train");
  record["eval_label_convention"] = applied_convention(data.test, config.eval_labels);
  record["warnings"] = warnings;
  record["repeats"] = json::array({{{"repeat", 0}, {"seed", repeat_seed}}});
  json entry = method_entry(kind, spec.K);
  entry["status"] = "ok";
  std::vector<std::uint64_t> member_seeds;
  for (std::size_t k = 0; k < spec.K; ++k) member_seeds.push_back(spec.train.seed + k);
  entry["member_seeds"] = json::array({member_seeds});
  fill_metrics(entry, {m}, {mean_posterior_sd(predictor)}, data.test.classes());
  record["methods"] = json::array({entry});
  record["table"] = format_table(record);
  record["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(predictor), kind, std::move(record)};
}

json run_bench(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  json record = base_record(config, "bench");
  std::vector<std::string> warnings;

  struct Accum {
    std::vector<RepeatMetrics> ok;
    std::vector<double> sds;
    json failures = json::array();
    json member_seeds = json::array();
    std::size_t K = 0;
  };
  std::vector<Accum> acc(config.methods.size());
  json repeats = json::array();
  std::size_t classes = 0;
  std::string convention;

  for (std::size_t r = 0; r < config.repeats; ++r) {
    const std::uint64_t repeat_seed = config.seed + r;
    repeats.push_back({{"repeat", r}, {"seed", repeat_seed}});
    const DataSplit data = prepare_data(config, repeat_seed);
    const Architecture arch = architecture_for(config, data.train);
    classes = data.test.classes();
    convention = applied_convention(data.test, config.eval_labels);

    for (std::size_t i = 0; i < config.methods.size(); ++i) {
      const MethodKind kind = config.methods[i];
      const MethodSpec spec = method_spec(config, kind, repeat_seed, warnings);
      Accum& a = acc[i];
      a.K = spec.K;
      std::vector<std::uint64_t> seeds;
      for (std::size_t k = 0; k < spec.K; ++k) seeds.push_back(spec.train.seed + k);
      a.member_seeds.push_back(seeds);
      try {
        const Predictor predictor = train_method(data.train, arch, spec);
        Rng rng = make_rng(repeat_seed, 300 + method_index(kind));
        a.ok.push_back(evaluate(predictor, data.test, config.pred_samples, rng, config.eval_labels));
        a.sds.push_back(mean_posterior_sd(predictor));
        write_weight_stats(config, predictor, kind, r);
      } catch (const TrainingDivergedError& e) {
        a.failures.push_back({{"repeat", r}, {"error", "training_diverged"}, {"message", e.what()}});
      } catch (const Error& e) {
        a.failures.push_back({{"repeat", r}, {"error", "error"}, {"message", e.what()}});
      }
    }
  }

  json methods = json::array();
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    json entry = method_entry(config.methods[i], acc[i].K);
    entry["status"] = acc[i].failures.empty() ? "ok" : "partial";
    fill_metrics(entry, acc[i].ok, acc[i].sds, classes);
    entry["failures"] = acc[i].failures;
    entry["member_seeds"] = acc[i].member_seeds;
    methods.push_back(entry);
  }
  record["eval_label_convention"] = convention;
  std::vector<std::string> unique;
  for (const auto& w : warnings)
    if (std::find(unique.begin(), unique.end(), w) == unique.end()) unique.push_back(w);
  record["warnings"] = unique;
  record["repeats"] = repeats;
  record["methods"] = methods;
  record["table"] = format_table(record);
  record["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

std::string format_table(const json& record) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s | %-14s | %-14s | %-14s\n", "Model", "Accuracy", "NLL x10",
                "Brier x10^3");
  os << line;
  for (const auto& m : record.at("methods")) {
    const std::string name = m.at("name").get<std::string>();
    if (!m.contains("table")) {
      std::snprintf(line, sizeof(line), "%-8s | %-14s | %-14s | %-14s\n", name.c_str(), "failed", "-", "-");
    } else {
      const auto& t = m.at("table");
      std::snprintf(line, sizeof(line), "%-8s | %-14s | %-14s | %-14s\n", name.c_str(),
                    t.at("accuracy_pct").get<std::string>().c_str(), t.at("nll_x10").get<std::string>().c_str(),
                    t.at("brier_x1e3").get<std::string>().c_str());
    }
    os << line;
  }
  return os.str();
}

json predictor_to_json(const Predictor& p, MethodKind kind) {
  json members = json::array();
  for (const auto& m : p.members)
    members.push_back({{"arch", m.arch.widths()}, {"mu", tensor_set_to_json(m.theta.mu)},
                       {"rho", tensor_set_to_json(m.theta.rho)}});
  return {{"format", "softev-model"},
          {"version", 1},
          {"method", to_string(kind)},
          {"combine", p.combine == Combine::vote ? "vote" : "average"},
          {"members", members}};
}

Predictor predictor_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "softev-model") throw DataError("not a softev model file");
    if (j.at("version").get<int>() != 1) throw DataError("unsupported model file version");
    Predictor p;
    const std::string combine = j.at("combine").get<std::string>();
    if (combine != "vote" && combine != "average") throw DataError("unknown combine rule '" + combine + "'");
    p.combine = combine == "vote" ? Combine::vote : Combine::average;
    for (const auto& m : j.at("members")) {
      Member member{{tensor_set_from_json(m.at("mu")), tensor_set_from_json(m.at("rho"))},
                    Architecture(m.at("arch").get<std::vector<std::size_t>>())};
      check_variational(member.theta, member.arch);
      p.members.push_back(std::move(member));
    }
    if (p.members.empty()) throw DataError("model file has no members");
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const ShapeError& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void generate_data(const RunConfig& config, const std::filesystem::path& train_out,
                   const std::filesystem::path& test_out) {
  if (!config.synth) throw UsageError("data generation needs a synthetic spec");
  RunConfig c = config;
  c.train_path.reset();
  c.test_path.reset();
  c.validate();
  const DataSplit data = prepare_data(c, c.seed);
  save_soft_csv(data.train, train_out);
  save_soft_csv(data.test, test_out);
}

json without_wall_clock(json record) {
  record.erase("wall_clock_seconds");
  return record;
}

}  // namespace softev
