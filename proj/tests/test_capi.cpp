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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "softev/softev.h"

using doctest::Approx;

namespace {

const double kJoint[] = {0.3, 0.2, 0.1, 0.4};

std::string take(char* s) {
  std::string out = s ? s : "";
  softev_string_free(s);
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "softev_capi_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

const char* kTinyConfig =
    R"({"methods": ["sparsek"], "k": 2, "hidden": [4], "epochs": 2, "batch_size": 16, "pred_samples": 4,
        "synth": {"classes": 3, "dims": 2, "train_per_class": 10, "test_per_class": 5}, "seed": 3})";

}  // namespace

TEST_CASE("status helpers") {
  CHECK(std::string(softev_version()) == SOFTEV_VERSION);
  CHECK(std::string(softev_status_name(SOFTEV_OK)) == "ok");
  CHECK(softev_exit_code(SOFTEV_OK) == 0);
  CHECK(softev_exit_code(SOFTEV_ERR_TRAINING_DIVERGED) == 3);
  CHECK(softev_exit_code(SOFTEV_ERR_DATA) == 2);
  CHECK(softev_exit_code(SOFTEV_ERR_USAGE) == 2);
  softev_string_free(nullptr);
}

TEST_CASE("jeffrey functions") {
  double out[2];
  REQUIRE(softev_hard_condition(kJoint, 2, 2, 0, out) == SOFTEV_OK);
  CHECK(out[0] == Approx(0.75));
  const double r[] = {0.8, 0.2};
  REQUIRE(softev_jeffrey_update(kJoint, 2, 2, r, out) == SOFTEV_OK);
  CHECK(out[0] == Approx(2.0 / 3.0).epsilon(1e-12));
  REQUIRE(softev_kl_oracle(kJoint, 2, 2, r, 1000, out) == SOFTEV_OK);
  CHECK(std::abs(out[0] - 2.0 / 3.0) <= 0.002);

  const double zero_col[] = {0.5, 0.0, 0.5, 0.0};
  CHECK(softev_hard_condition(zero_col, 2, 2, 1, out) == SOFTEV_ERR_DEGENERATE_EVIDENCE);
  CHECK(std::strlen(softev_last_error()) > 0);
  CHECK(softev_hard_condition(kJoint, 2, 2, 5, out) == SOFTEV_ERR_BOUNDS);
  const double bad[] = {0.3, 0.2, 0.1, 0.3};
  CHECK(softev_jeffrey_update(bad, 2, 2, r, out) == SOFTEV_ERR_DOMAIN);
  CHECK(softev_hard_condition(nullptr, 2, 2, 0, out) == SOFTEV_ERR_USAGE);

  double kl = 0.0;
  const double q[] = {1.0, 0.0}, p[] = {0.5, 0.5};
  REQUIRE(softev_kl_divergence(q, p, 2, &kl) == SOFTEV_OK);
  CHECK(kl == Approx(std::log(2.0)));
  REQUIRE(softev_kl_divergence(p, q, 2, &kl) == SOFTEV_OK);
  CHECK(std::isinf(kl));
}

TEST_CASE("dataset handles") {
  softev_dataset* ds = nullptr;
  REQUIRE(softev_dataset_synth_blobs(3, 2, 10, 4.0, 1, &ds) == SOFTEV_OK);
  CHECK(softev_dataset_rows(ds) == 30);
  CHECK(softev_dataset_dims(ds) == 2);
  CHECK(softev_dataset_classes(ds) == 3);
  softev_dataset* noisy = nullptr;
  REQUIRE(softev_dataset_corrupt(ds, 3, 0.3, 2, &noisy) == SOFTEV_OK);
  double share = 0.0;
  REQUIRE(softev_dataset_mean_top_vote_share(noisy, &share) == SOFTEV_OK);
  CHECK(share >= 1.0 / 3.0);
  CHECK(share <= 1.0);

  std::vector<double> labels(90);
  REQUIRE(softev_dataset_soft_labels(noisy, labels.data(), labels.size()) == SOFTEV_OK);
  CHECK(softev_dataset_soft_labels(noisy, labels.data(), 10) == SOFTEV_ERR_BOUNDS);

  const auto path = scratch("noisy.csv");
  REQUIRE(softev_dataset_save_csv(noisy, path.c_str()) == SOFTEV_OK);
  softev_dataset* back = nullptr;
  REQUIRE(softev_dataset_load_csv(path.c_str(), &back) == SOFTEV_OK);
  std::vector<double> again(90);
  REQUIRE(softev_dataset_soft_labels(back, again.data(), again.size()) == SOFTEV_OK);
  CHECK(again == labels);

  softev_dataset* missing = nullptr;
  CHECK(softev_dataset_load_csv("/nonexistent/x.csv", &missing) == SOFTEV_ERR_IO);
  CHECK(missing == nullptr);
  {
    std::ofstream bad(scratch("bad.csv"));
    bad << "id,f_0,p_0,p_1\nx,0,0.5,0.2\n";
  }
  CHECK(softev_dataset_load_csv(scratch("bad.csv").c_str(), &missing) == SOFTEV_ERR_DATA);
  CHECK(std::string(softev_last_error()).find("row 1") != std::string::npos);

  {
    std::ofstream ann(scratch("ann.csv"));
    ann << "item_id,annotator_id,label\na,x,0\na,y,1\nb,x,1\n";
  }
  softev_dataset* agg = nullptr;
  REQUIRE(softev_dataset_from_annotations(scratch("ann.csv").c_str(), 2, &agg) == SOFTEV_OK);
  CHECK(softev_dataset_rows(agg) == 2);

  softev_dataset_free(agg);
  softev_dataset_free(back);
  softev_dataset_free(noisy);
  softev_dataset_free(ds);
  softev_dataset_free(nullptr);
}

TEST_CASE("train, save, load and predict") {
  softev_model* model = nullptr;
  char* results = nullptr;
  REQUIRE(softev_train(kTinyConfig, &model, &results) == SOFTEV_OK);
  const auto record = nlohmann::json::parse(take(results));
  CHECK(record.at("methods")[0].at("method") == "sparsek");
  CHECK(softev_model_members(model) == 2);
  CHECK(softev_model_classes(model) == 3);

  const double x[] = {0.0, 0.0, 3.0, -1.0};
  double p1[6], p2[6];
  REQUIRE(softev_model_predict(model, x, 2, 2, 8, 7, p1) == SOFTEV_OK);
  CHECK(p1[0] + p1[1] + p1[2] == Approx(1.0).epsilon(1e-9));
  CHECK(softev_model_predict(model, x, 2, 3, 8, 7, p1) == SOFTEV_ERR_SHAPE);

  const auto path = scratch("model.json");
  REQUIRE(softev_model_save(model, path.c_str()) == SOFTEV_OK);
  softev_model* loaded = nullptr;
  REQUIRE(softev_model_load(path.c_str(), &loaded) == SOFTEV_OK);
  REQUIRE(softev_model_predict(model, x, 2, 2, 8, 7, p1) == SOFTEV_OK);
  REQUIRE(softev_model_predict(loaded, x, 2, 2, 8, 7, p2) == SOFTEV_OK);
  CHECK(std::memcmp(p1, p2, sizeof p1) == 0);

  char* csv = nullptr;
  REQUIRE(softev_model_weight_stats_csv(loaded, 1, &csv) == SOFTEV_OK);
  CHECK(take(csv).rfind("layer,mean_abs_mu,mean_sd,bin_0", 0) == 0);
  CHECK(softev_model_weight_stats_csv(loaded, 2, &csv) == SOFTEV_ERR_BOUNDS);

  softev_model_free(loaded);
  softev_model_free(model);
  REQUIRE(softev_train(kTinyConfig, nullptr, &results) == SOFTEV_OK);
  take(results);
}

TEST_CASE("experiment entry points report errors") {
  char* results = nullptr;
  CHECK(softev_bench("{not json", &results) == SOFTEV_ERR_USAGE);
  CHECK(softev_bench(R"({"bogus": 1})", &results) == SOFTEV_ERR_USAGE);
  CHECK(softev_train(
            R"({"methods": ["nl"], "lr": 1e6, "momentum": 0.99, "epochs": 50, "hidden": [8],
                "synth": {"classes": 2, "dims": 2, "train_per_class": 20, "test_per_class": 5}})",
            nullptr, &results) == SOFTEV_ERR_TRAINING_DIVERGED);

  const auto train = scratch("gen_train.csv"), test = scratch("gen_test.csv");
  REQUIRE(softev_generate_data(kTinyConfig, train.c_str(), test.c_str()) == SOFTEV_OK);
  softev_dataset* ds = nullptr;
  REQUIRE(softev_dataset_load_csv(test.c_str(), &ds) == SOFTEV_OK);
  CHECK(softev_dataset_rows(ds) == 15);
  softev_dataset_free(ds);

  REQUIRE(softev_bench(kTinyConfig, &results) == SOFTEV_OK);
  const auto record = nlohmann::json::parse(take(results));
  CHECK(record.at("command") == "bench");
}
