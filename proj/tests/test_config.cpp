#include <catch2/catch_amalgamated.hpp>

#include "adact/experiment.hpp"

using namespace adact;

namespace {

json valid_doc() {
    return json::parse(R"({
      "data": {"source": "gen_sine", "params": {"n_train": 500, "n_test": 50, "seed": 3}},
      "model": {"N_h": 1, "H": 20, "init_activation": "sigmoid"},
      "train": {"trainer": "adact", "N_it": 10, "seed": 1, "optimizer_for_acts": "olf"},
      "eval": {"k_folds": 5},
      "output": {"directory": "out"}
    })");
}

std::string config_error_path(const json& doc) {
    try {
        parse_experiment_config(doc);
    } catch (const ConfigError& e) {
        return e.path;
    }
    return "";
}

}  // namespace

TEST_CASE("a complete document parses into the expected config", "[config]") {
    const ExperimentConfig cfg = parse_experiment_config(valid_doc());
    REQUIRE(cfg.data.source == DataSource::GenSine);
    REQUIRE(cfg.data.n_train == 500);
    REQUIRE(cfg.train.trainer == TrainerKind::AdAct);
    REQUIRE(cfg.train.hidden_units == 1);
    REQUIRE(cfg.train.hinges == 20);
    REQUIRE(cfg.train.iterations == 10);
    REQUIRE(cfg.k_folds == 5);
    REQUIRE(cfg.output_directory == "out");
}

TEST_CASE("unknown keys are rejected with their field path", "[config]") {
    json doc = valid_doc();
    doc["extra"] = 1;
    REQUIRE(config_error_path(doc) == "extra");

    doc = valid_doc();
    doc["data"]["params"]["n_trian"] = 10;
    REQUIRE(config_error_path(doc) == "data.params.n_trian");

    doc = valid_doc();
    doc["train"]["adam"] = {{"beta1", 0.9}, {"beta3", 0.1}};
    REQUIRE(config_error_path(doc) == "train.adam.beta3");
}

TEST_CASE("bad values are rejected with their field path", "[config]") {
    json doc = valid_doc();
    doc["data"]["source"] = "gen_cosine";
    REQUIRE(config_error_path(doc) == "data.source");

    doc = valid_doc();
    doc["model"]["H"] = 1;
    REQUIRE(config_error_path(doc) == "model.H");

    doc = valid_doc();
    doc["train"]["trainer"] = "lm";
    REQUIRE(config_error_path(doc) == "train.trainer");

    doc = valid_doc();
    doc["train"]["N_it"] = 0;
    REQUIRE(config_error_path(doc) == "train.N_it");

    doc = valid_doc();
    doc["eval"]["k_folds"] = 1;
    REQUIRE(config_error_path(doc) == "eval.k_folds");

    doc = valid_doc();
    doc.erase("output");
    REQUIRE(config_error_path(doc) == "output");

    doc = valid_doc();
    doc["model"]["init_activation"] = "gelu";
    REQUIRE(config_error_path(doc) == "model.init_activation");
}

TEST_CASE("csv sources demand their column counts", "[config]") {
    json doc = valid_doc();
    doc["data"] = {{"source", "csv"}, {"params", {{"path", "a.csv"}, {"n_inputs", 2}}}};
    REQUIRE(config_error_path(doc) == "data.params.n_outputs");

    doc["data"]["params"]["n_outputs"] = 1;
    doc["data"]["params"]["kind"] = "classification";
    const ExperimentConfig cfg = parse_experiment_config(doc);
    REQUIRE(cfg.data.source == DataSource::Csv);
    REQUIRE(cfg.data.kind == TaskKind::Classification);
}

TEST_CASE("defaults round trip through the effective document", "[config]") {
    const ExperimentConfig cfg = parse_experiment_config(valid_doc());
    const json effective = experiment_config_to_json(cfg);
    const ExperimentConfig again = parse_experiment_config(effective);
    REQUIRE(again.train.adam.beta1 == cfg.train.adam.beta1);
    REQUIRE(again.train.init_sigma == cfg.train.init_sigma);
    REQUIRE(again.train.leaky_slope == cfg.train.leaky_slope);
    REQUIRE(again.data.n_test == cfg.data.n_test);
    REQUIRE(experiment_config_to_json(again) == effective);
}
