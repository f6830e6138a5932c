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


// softev command-line tool.
//
//   softev jeffrey INPUT.json
//   softev gen-data --synth [synthetic options] --out DIR
//   softev train --method nl (--data TRAIN.csv --test-data TEST.csv | --synth ...) --out RESULTS.json
//   softev bench (--data ... | --synth ...) --repeats 5 --out RESULTS.json
//   softev weight-stats --model MODEL.json --out STATS.csv
//
// Exit codes: 0 success, 2 usage or data error, 3 training divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "softev/softev.h"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 2;

struct Options {
  std::string config_file;
  std::string method;
  std::vector<std::string> methods;
  std::optional<std::size_t> k, epochs, repeats, mc_samples, pred_samples, batch_size;
  std::optional<double> lr, momentum;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> hidden;
  std::string data, test_data;
  bool synth = false;
  std::optional<std::size_t> classes, dims, train_per_class, test_per_class, annotators;
  std::optional<double> separation, error_rate;
  std::string eval_labels, bag_labels, resample_scope;
  bool parallel = false;
  std::string out, model_out, weight_stats_dir;
};

void add_run_options(CLI::App* cmd, Options& o, bool bench) {
  cmd->add_option("--config", o.config_file, "JSON run configuration; flags override its keys");
  if (bench)
    cmd->add_option("--methods", o.methods, "Methods to compare (default: all five)");
  else
    cmd->add_option("--method", o.method, "sparsek | jnn | nl | nle | bag");
  cmd->add_option("--k", o.k, "Ensemble size for sparsek, nle and bag (default 3)");
  cmd->add_option("--epochs", o.epochs, "Training epochs (default 100)");
  cmd->add_option("--repeats", o.repeats, "Repeats, each with seed + r (default 1)");
  cmd->add_option("--seed", o.seed, "Master seed (default 0)");
  cmd->add_option("--mc-samples", o.mc_samples, "Weight samples per minibatch loss (default 1)");
  cmd->add_option("--pred-samples", o.pred_samples, "Weight samples per posterior predictive (default 32)");
  cmd->add_option("--batch-size", o.batch_size, "Minibatch size (default 32)");
  cmd->add_option("--lr", o.lr, "SGD learning rate (default 0.01)");
  cmd->add_option("--momentum", o.momentum, "SGD momentum (default 0.9)");
  cmd->add_option("--hidden", o.hidden, "Hidden layer widths (default 32)");
  cmd->add_option("--data", o.data, "Training soft-label CSV");
  cmd->add_option("--test-data", o.test_data, "Held-out soft-label CSV");
  cmd->add_flag("--synth", o.synth, "Use synthetic corrupted blobs instead of CSV files");
  cmd->add_option("--classes", o.classes, "Synthetic: classes (default 4)");
  cmd->add_option("--dims", o.dims, "Synthetic: feature dimensions (default 8)");
  cmd->add_option("--train-per-class", o.train_per_class, "Synthetic: training rows per class (default 500)");
  cmd->add_option("--test-per-class", o.test_per_class, "Synthetic: test rows per class (default 250)");
  cmd->add_option("--separation", o.separation, "Synthetic: distance between class centers (default 3)");
  cmd->add_option("--annotators", o.annotators, "Synthetic: simulated annotators per item (default 3)");
  cmd->add_option("--error-rate", o.error_rate, "Synthetic: annotator error rate (default 0.308)");
  cmd->add_option("--eval-labels", o.eval_labels, "true_label | argmax");
  cmd->add_option("--bag-labels", o.bag_labels, "sample | argmax");
  cmd->add_option("--resample-scope", o.resample_scope, "per_sample | per_batch");
  cmd->add_flag("--parallel", o.parallel, "Train ensemble members concurrently");
  cmd->add_option("--weight-stats-dir", o.weight_stats_dir, "Write per-member weight statistics CSVs here");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return json::parse(in);
}

json build_config(const Options& o) {
  json c = o.config_file.empty() ? json::object() : read_json_file(o.config_file);
  if (!o.method.empty()) {
    c.erase("methods");
    c["method"] = o.method;
  }
  if (!o.methods.empty()) c["methods"] = o.methods;
  if (o.k) c["k"] = *o.k;
  if (o.epochs) c["epochs"] = *o.epochs;
  if (o.repeats) c["repeats"] = *o.repeats;
  if (o.seed) c["seed"] = *o.seed;
  if (o.mc_samples) c["mc_samples"] = *o.mc_samples;
  if (o.pred_samples) c["pred_samples"] = *o.pred_samples;
  if (o.batch_size) c["batch_size"] = *o.batch_size;
  if (o.lr) c["lr"] = *o.lr;
  if (o.momentum) c["momentum"] = *o.momentum;
  if (!o.hidden.empty()) c["hidden"] = o.hidden;
  if (!o.data.empty()) c["train_data"] = o.data;
  if (!o.test_data.empty()) c["test_data"] = o.test_data;
  const bool synth_flags = o.classes || o.dims || o.train_per_class || o.test_per_class || o.separation ||
                           o.annotators || o.error_rate;
  if (o.synth || synth_flags) {
    json s = c.contains("synth") && c["synth"].is_object() ? c["synth"] : json::object();
    if (o.classes) s["classes"] = *o.classes;
    if (o.dims) s["dims"] = *o.dims;
    if (o.train_per_class) s["train_per_class"] = *o.train_per_class;
    if (o.test_per_class) s["test_per_class"] = *o.test_per_class;
    if (o.separation) s["separation"] = *o.separation;
    if (o.annotators) s["annotators"] = *o.annotators;
    if (o.error_rate) s["error_rate"] = *o.error_rate;
    c["synth"] = s;
  }
  if (!o.eval_labels.empty()) c["eval_labels"] = o.eval_labels;
  if (!o.bag_labels.empty()) c["bag_labels"] = o.bag_labels;
  if (!o.resample_scope.empty()) c["resample_scope"] = o.resample_scope;
  if (o.parallel) c["parallel"] = true;
  if (!o.weight_stats_dir.empty()) c["weight_stats_dir"] = o.weight_stats_dir;
  return c;
}

int report(softev_status status) {
  std::cerr << "softev: " << softev_status_name(status) << ": " << softev_last_error() << '\n';
  return softev_exit_code(status);
}

int write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text)) {
    std::cerr << "softev: cannot write '" << path << "'\n";
    return kExitUsage;
  }
  return 0;
}

void print_warnings(const json& record) {
  for (const auto& w : record.value("warnings", json::array())) std::cerr << "warning: " << w.get<std::string>() << '\n';
}

int cmd_jeffrey(const std::string& input) {
  json j;
  try {
    j = read_json_file(input);
  } catch (const std::exception& e) {
    std::cerr << "softev: " << e.what() << '\n';
    return kExitUsage;
  }
  std::vector<std::vector<double>> rows;
  std::vector<double> constraint;
  try {
    rows = j.at("joint").get<std::vector<std::vector<double>>>();
    constraint = j.at("constraint").get<std::vector<double>>();
  } catch (const json::exception& e) {
    std::cerr << "softev: input needs 'joint' (list of rows) and 'constraint': " << e.what() << '\n';
    return kExitUsage;
  }
  if (rows.empty()) {
    std::cerr << "softev: joint table is empty\n";
    return kExitUsage;
  }
  const std::size_t alpha = rows.size(), events = rows.front().size();
  std::vector<double> cells;
  for (const auto& r : rows) {
    if (r.size() != events) {
      std::cerr << "softev: joint table rows differ in length\n";
      return kExitUsage;
    }
    cells.insert(cells.end(), r.begin(), r.end());
  }
  if (constraint.size() != events) {
    std::cerr << "softev: constraint has " << constraint.size() << " entries, joint has " << events << " events\n";
    return kExitUsage;
  }
  std::vector<double> out(alpha);
  if (const auto st = softev_jeffrey_update(cells.data(), alpha, events, constraint.data(), out.data()); st != SOFTEV_OK)
    return report(st);
  for (std::size_t a = 0; a < alpha; ++a) std::printf(a ? " %.6f" : "%.6f", out[a]);
  std::printf("\n");
  return 0;
}

int cmd_gen_data(const Options& o, const std::string& out_dir) {
  const std::string config = build_config(o).dump();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const std::string train = (std::filesystem::path(out_dir) / "train.csv").string();
  const std::string test = (std::filesystem::path(out_dir) / "test.csv").string();
  if (const auto st = softev_generate_data(config.c_str(), train.c_str(), test.c_str()); st != SOFTEV_OK)
    return report(st);
  std::cout << train << '\n' << test << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  const std::string config = build_config(o).dump();
  softev_model* model = nullptr;
  char* results = nullptr;
  if (const auto st = softev_train(config.c_str(), o.model_out.empty() ? nullptr : &model, &results); st != SOFTEV_OK)
    return report(st);
  const std::string text = results;
  softev_string_free(results);
  int rc = 0;
  if (model) {
    if (const auto st = softev_model_save(model, o.model_out.c_str()); st != SOFTEV_OK) rc = report(st);
    softev_model_free(model);
  }
  const json record = json::parse(text);
  print_warnings(record);
  std::cout << record.at("table").get<std::string>();
  if (!o.out.empty() && rc == 0) rc = write_text(o.out, text + "\n");
  return rc;
}

int cmd_bench(const Options& o) {
  const std::string config = build_config(o).dump();
  char* results = nullptr;
  if (const auto st = softev_bench(config.c_str(), &results); st != SOFTEV_OK) return report(st);
  const std::string text = results;
  softev_string_free(results);
  const json record = json::parse(text);
  print_warnings(record);
  for (const auto& m : record.at("methods"))
    for (const auto& f : m.at("failures"))
      std::cerr << "failure: " << m.at("name").get<std::string>() << " repeat " << f.at("repeat") << ": "
                << f.at("message").get<std::string>() << '\n';
  std::cout << record.at("table").get<std::string>();
  return o.out.empty() ? 0 : write_text(o.out, text + "\n");
}

int cmd_weight_stats(const std::string& model_path, std::size_t member, const std::string& out) {
  softev_model* model = nullptr;
  if (const auto st = softev_model_load(model_path.c_str(), &model); st != SOFTEV_OK) return report(st);
  char* csv = nullptr;
  const auto st = softev_model_weight_stats_csv(model, member, &csv);
  softev_model_free(model);
  if (st != SOFTEV_OK) return report(st);
  const std::string text = csv;
  softev_string_free(csv);
  if (out.empty()) {
    std::cout << text;
    return 0;
  }
  return write_text(out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft-evidence Bayesian neural network benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", softev_version());

  std::string jeffrey_input;
  auto* jeffrey = app.add_subcommand("jeffrey", "Apply Jeffrey's rule to a joint table and soft evidence (JSON)");
  jeffrey->add_option("input", jeffrey_input, "JSON file with 'joint' rows and 'constraint'")->required();

  Options gen_opts;
  std::string gen_out = ".";
  auto* gen = app.add_subcommand("gen-data", "Write synthetic train.csv and test.csv");
  add_run_options(gen, gen_opts, false);
  gen->add_option("--out", gen_out, "Output directory (default .)");

  Options train_opts;
  auto* train = app.add_subcommand("train", "Train and evaluate one method");
  add_run_options(train, train_opts, false);
  train->add_option("--out", train_opts.out, "Results JSON path");
  train->add_option("--model", train_opts.model_out, "Model JSON path");

  Options bench_opts;
  auto* bench = app.add_subcommand("bench", "Compare all methods over repeats");
  add_run_options(bench, bench_opts, true);
  bench->add_option("--out", bench_opts.out, "Results JSON path");

  std::string stats_model, stats_out;
  std::size_t stats_member = 0;
  auto* stats = app.add_subcommand("weight-stats", "Export per-layer weight statistics of a model");
  stats->add_option("--model", stats_model, "Model JSON written by 'train --model'")->required();
  stats->add_option("--member", stats_member, "Ensemble member (default 0)");
  stats->add_option("--out", stats_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*jeffrey) return cmd_jeffrey(jeffrey_input);
    if (*gen) {
      gen_opts.synth = true;
      return cmd_gen_data(gen_opts, gen_out);
    }
    if (*train) return cmd_train(train_opts);
    if (*bench) return cmd_bench(bench_opts);
    if (*stats) return cmd_weight_stats(stats_model, stats_member, stats_out);
  } catch (const std::exception& e) {
    std::cerr << "softev: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
