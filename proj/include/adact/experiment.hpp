#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "data.hpp"
#include "errors.hpp"
#include "serialize.hpp"
#include "trainers.hpp"

namespace adact {

// ---------------------------------------------------------------------------
// Experiment configuration document

enum class DataSource { GenSine, GenRosenbrock, Csv };

struct DataSection {
    DataSource source = DataSource::GenSine;
    std::size_t n_train = 5000;
    std::size_t n_test = 100;
    std::uint32_t seed = 1;
    // csv source only
    std::string path;
    std::string test_path;
    std::size_t n_inputs = 0;
    std::size_t n_outputs = 0;
    TaskKind kind = TaskKind::Approximation;
};

struct ExperimentConfig {
    DataSection data;
    TrainConfig train;
    std::size_t k_folds = 10;
    std::string output_directory;
};

namespace cfgdetail {

inline void reject_unknown(const json& j, const std::string& path,
                           const std::set<std::string>& allowed) {
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw ConfigError(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
}

inline const json& require(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) throw ConfigError(path.empty() ? key : path + "." + key, "missing");
    return j.at(key);
}

inline std::string get_string(const json& j, const std::string& path, const std::string& key) {
    const json& v = require(j, path, key);
    if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

inline std::int64_t get_int(const json& j, const std::string& path, const std::string& key,
                            std::int64_t def, bool required = false) {
    if (!j.contains(key)) {
        if (required) throw ConfigError(path + "." + key, "missing");
        return def;
    }
    const json& v = j.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError(path + "." + key, "expected an integer");
    return v.get<std::int64_t>();
}

inline double get_real(const json& j, const std::string& path, const std::string& key,
                       double def) {
    if (!j.contains(key)) return def;
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
    return v.get<double>();
}

}  // namespace cfgdetail

// Parses and validates the experiment document. Unknown keys anywhere are
// rejected with their field path; enum fields must hold known names.
inline ExperimentConfig parse_experiment_config(const json& j) {
    using namespace cfgdetail;
    if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
    reject_unknown(j, "", {"data", "model", "train", "eval", "output"});

    ExperimentConfig cfg;

    const json& data = require(j, "", "data");
    reject_unknown(data, "data", {"source", "params"});
    const std::string source = get_string(data, "data", "source");
    const json params = data.contains("params") ? data.at("params") : json::object();
    if (!params.is_object()) throw ConfigError("data.params", "expected an object");
    if (source == "gen_sine" || source == "gen_rosenbrock") {
        cfg.data.source = source == "gen_sine" ? DataSource::GenSine : DataSource::GenRosenbrock;
        reject_unknown(params, "data.params", {"n_train", "n_test", "seed"});
        cfg.data.n_train = static_cast<std::size_t>(get_int(params, "data.params", "n_train", 5000));
        cfg.data.n_test = static_cast<std::size_t>(get_int(params, "data.params", "n_test", 100));
        cfg.data.seed = static_cast<std::uint32_t>(get_int(params, "data.params", "seed", 1));
        if (cfg.data.n_train < 1) throw ConfigError("data.params.n_train", "must be >= 1");
        if (cfg.data.n_test < 1) throw ConfigError("data.params.n_test", "must be >= 1");
    } else if (source == "csv") {
        cfg.data.source = DataSource::Csv;
        reject_unknown(params, "data.params",
                       {"path", "test_path", "n_inputs", "n_outputs", "kind"});
        cfg.data.path = get_string(params, "data.params", "path");
        if (params.contains("test_path"))
            cfg.data.test_path = get_string(params, "data.params", "test_path");
        cfg.data.n_inputs =
            static_cast<std::size_t>(get_int(params, "data.params", "n_inputs", 0, true));
        cfg.data.n_outputs =
            static_cast<std::size_t>(get_int(params, "data.params", "n_outputs", 0, true));
        if (cfg.data.n_inputs < 1) throw ConfigError("data.params.n_inputs", "must be >= 1");
        if (cfg.data.n_outputs < 1) throw ConfigError("data.params.n_outputs", "must be >= 1");
        if (params.contains("kind")) {
            try {
                cfg.data.kind = task_kind_from_name(get_string(params, "data.params", "kind"));
            } catch (const Error& e) {
                throw ConfigError("data.params.kind", e.what());
            }
        }
    } else {
        throw ConfigError("data.source",
                          "expected one of gen_sine, gen_rosenbrock, csv; got '" + source + "'");
    }

    const json& model = require(j, "", "model");
    reject_unknown(model, "model", {"N_h", "H", "init_activation", "leaky_slope"});
    cfg.train.hidden_units = static_cast<std::size_t>(get_int(model, "model", "N_h", 10));
    cfg.train.hinges = static_cast<std::size_t>(get_int(model, "model", "H", 20));
    if (cfg.train.hidden_units < 1) throw ConfigError("model.N_h", "must be >= 1");
    if (cfg.train.hinges < 2) throw ConfigError("model.H", "must be >= 2");
    if (model.contains("init_activation")) {
        try {
            cfg.train.init_activation =
                reference_from_name(get_string(model, "model", "init_activation"));
        } catch (const Error& e) {
            throw ConfigError("model.init_activation", e.what());
        }
    }
    cfg.train.leaky_slope = get_real(model, "model", "leaky_slope", kDefaultLeakySlope);

    const json& train = require(j, "", "train");
    reject_unknown(train, "train",
                   {"trainer", "N_it", "seed", "optimizer_for_acts", "adam", "sigma"});
    if (train.contains("trainer")) {
        try {
            cfg.train.trainer = trainer_from_name(get_string(train, "train", "trainer"));
        } catch (const Error& e) {
            throw ConfigError("train.trainer", e.what());
        }
    }
    const std::int64_t n_it = get_int(train, "train", "N_it", 100);
    if (n_it < 1) throw ConfigError("train.N_it", "must be >= 1");
    cfg.train.iterations = static_cast<std::size_t>(n_it);
    cfg.train.seed = static_cast<std::uint32_t>(get_int(train, "train", "seed", 1));
    if (train.contains("optimizer_for_acts")) {
        const std::string opt = get_string(train, "train", "optimizer_for_acts");
        if (opt == "olf")
            cfg.train.act_optimizer = ActOptimizer::Olf;
        else if (opt == "adam")
            cfg.train.act_optimizer = ActOptimizer::Adam;
        else
            throw ConfigError("train.optimizer_for_acts", "expected olf or adam");
    }
    if (train.contains("adam")) {
        const json& adam = train.at("adam");
        if (!adam.is_object()) throw ConfigError("train.adam", "expected an object");
        reject_unknown(adam, "train.adam", {"beta1", "beta2", "eps", "rate"});
        cfg.train.adam.beta1 = get_real(adam, "train.adam", "beta1", cfg.train.adam.beta1);
        cfg.train.adam.beta2 = get_real(adam, "train.adam", "beta2", cfg.train.adam.beta2);
        cfg.train.adam.eps = get_real(adam, "train.adam", "eps", cfg.train.adam.eps);
        cfg.train.adam.rate = get_real(adam, "train.adam", "rate", cfg.train.adam.rate);
    }
    cfg.train.init_sigma = get_real(train, "train", "sigma", 1.0);
    if (cfg.train.init_sigma < 0.0) throw ConfigError("train.sigma", "must be >= 0");

    if (j.contains("eval")) {
        const json& eval = j.at("eval");
        reject_unknown(eval, "eval", {"k_folds"});
        const std::int64_t k = get_int(eval, "eval", "k_folds", 10);
        if (k < 2) throw ConfigError("eval.k_folds", "must be >= 2");
        cfg.k_folds = static_cast<std::size_t>(k);
    }

    const json& output = require(j, "", "output");
    reject_unknown(output, "output", {"directory"});
    cfg.output_directory = get_string(output, "output", "directory");
    if (cfg.output_directory.empty()) throw ConfigError("output.directory", "must not be empty");

    return cfg;
}

// Effective configuration with all defaults made explicit; this is the copy
// written into the output directory.
inline json experiment_config_to_json(const ExperimentConfig& cfg) {
    json params;
    if (cfg.data.source == DataSource::Csv) {
        params = {{"path", cfg.data.path},
                  {"n_inputs", cfg.data.n_inputs},
                  {"n_outputs", cfg.data.n_outputs},
                  {"kind", task_kind_name(cfg.data.kind)}};
        if (!cfg.data.test_path.empty()) params["test_path"] = cfg.data.test_path;
    } else {
        params = {{"n_train", cfg.data.n_train},
                  {"n_test", cfg.data.n_test},
                  {"seed", cfg.data.seed}};
    }
    const char* source = cfg.data.source == DataSource::GenSine ? "gen_sine"
                         : cfg.data.source == DataSource::GenRosenbrock ? "gen_rosenbrock"
                                                                        : "csv";
    return json{
        {"data", {{"source", source}, {"params", params}}},
        {"model",
         {{"N_h", cfg.train.hidden_units},
          {"H", cfg.train.hinges},
          {"init_activation", reference_name(cfg.train.init_activation)},
          {"leaky_slope", cfg.train.leaky_slope}}},
        {"train",
         {{"trainer", trainer_name(cfg.train.trainer)},
          {"N_it", cfg.train.iterations},
          {"seed", cfg.train.seed},
          {"optimizer_for_acts", cfg.train.act_optimizer == ActOptimizer::Olf ? "olf" : "adam"},
          {"adam",
           {{"beta1", cfg.train.adam.beta1},
            {"beta2", cfg.train.adam.beta2},
            {"eps", cfg.train.adam.eps},
            {"rate", cfg.train.adam.rate}}},
          {"sigma", cfg.train.init_sigma}}},
        {"eval", {{"k_folds", cfg.k_folds}}},
        {"output", {{"directory", cfg.output_directory}}}};
}

// ---------------------------------------------------------------------------
// Deterministic text artifacts: UTF-8, LF line endings, '.' decimal separator.

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_dataset_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    if (!d.names.empty()) {
        for (std::size_t i = 0; i < d.names.size(); ++i)
            out << (i ? "," : "") << d.names[i];
        out << "\n";
    }
    for (std::size_t p = 0; p < d.patterns(); ++p) {
        for (std::size_t j = 0; j < d.X.cols(); ++j) out << (j ? "," : "") << fmt_g17(d.X(p, j));
        for (std::size_t i = 0; i < d.T.cols(); ++i) out << "," << fmt_g17(d.T(p, i));
        out << "\n";
    }
}

inline void write_history_csv(const std::string& path, const TrainRun& run) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "iteration,train_mse,val_mse,val_pe,z_act,multiplies_cumulative\n";
    for (const IterationRecord& r : run.records)
        out << r.iteration << ',' << fmt_g17(r.train_mse) << ',' << fmt_g17(r.val_mse) << ','
            << fmt_g17(r.val_pe) << ',' << fmt_g17(r.z_act) << ',' << r.multiplies_cumulative
            << "\n";
}

inline void write_report_csv(const std::string& path, const CrossvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "fold,val_mse,val_pe\n";
    for (std::size_t f = 0; f < report.folds.size(); ++f)
        out << f << ',' << fmt_g17(report.folds[f].mse) << ',' << fmt_g17(report.folds[f].pe)
            << "\n";
    out << "mean," << fmt_g17(report.mean_mse) << ',' << fmt_g17(report.mean_pe) << "\n";
    out << "std," << fmt_g17(report.std_mse) << ',' << fmt_g17(report.std_pe) << "\n";
}

// One row per pattern: first input (original units), first target, first output.
inline void write_plotdata_csv(const std::string& path, const Matrix& x_raw, const Matrix& T,
                               const Matrix& Y) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "x,target,prediction\n";
    for (std::size_t p = 0; p < x_raw.rows(); ++p)
        out << fmt_g17(x_raw(p, 0)) << ',' << fmt_g17(T(p, 0)) << ',' << fmt_g17(Y(p, 0)) << "\n";
}

// One row per (unit, hinge): the trained activation shapes.
inline void write_activation_shapes_csv(const std::string& path, const ActivationBank& bank) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << "unit,ns,a\n";
    for (std::size_t u = 0; u < bank.size(); ++u) {
        const auto& pla = bank.unit(u);
        for (std::size_t m = 0; m < pla.grid.hinge_count(); ++m)
            out << u << ',' << fmt_g17(pla.grid.ns[m]) << ',' << fmt_g17(pla.a[m]) << "\n";
    }
}

// ---------------------------------------------------------------------------
// Data loading and the train / xval / plotdata entry points

struct LoadedData {
    Dataset train;
    std::optional<Dataset> test;
};

inline LoadedData load_experiment_data(const ExperimentConfig& cfg) {
    LoadedData out;
    switch (cfg.data.source) {
        case DataSource::GenSine: {
            SinePair pair = gen_sine(cfg.data.n_train, cfg.data.n_test, cfg.data.seed);
            out.train = std::move(pair.train);
            out.test = std::move(pair.test);
            break;
        }
        case DataSource::GenRosenbrock: {
            out.train = gen_rosenbrock(cfg.data.n_train, cfg.data.seed);
            out.test = gen_rosenbrock(cfg.data.n_test, cfg.data.seed + 1);
            break;
        }
        case DataSource::Csv: {
            out.train = load_csv(cfg.data.path, cfg.data.n_inputs, cfg.data.n_outputs,
                                 cfg.data.kind);
            if (!cfg.data.test_path.empty())
                out.test = load_csv(cfg.data.test_path, cfg.data.n_inputs, cfg.data.n_outputs,
                                    cfg.data.kind);
            break;
        }
    }
    return out;
}

struct TrainArtifacts {
    TrainOutcome outcome;
    StandardizeStats stats;
    std::filesystem::path directory;
};

// Full training run: datasets, config copy, history, and checkpoint land in
// the output directory. Deterministic for a fixed config.
inline TrainArtifacts run_train_experiment(const ExperimentConfig& cfg) {
    const std::filesystem::path dir(cfg.output_directory);
    std::filesystem::create_directories(dir);

    LoadedData data = load_experiment_data(cfg);
    write_dataset_csv((dir / "train.csv").string(), data.train);
    if (data.test) write_dataset_csv((dir / "test.csv").string(), *data.test);
    write_json_file((dir / "config.json").string(), experiment_config_to_json(cfg));

    TrainArtifacts result;
    result.directory = dir;
    result.stats = standardize(data.train, data.test ? &*data.test : nullptr);
    const Matrix* xv = data.test ? &data.test->X : nullptr;
    const Matrix* tv = data.test ? &data.test->T : nullptr;
    result.outcome = train(cfg.train, data.train.X, data.train.T, xv, tv);

    write_history_csv((dir / "history.csv").string(), result.outcome.run);
    write_json_file((dir / "checkpoint.json").string(),
                    checkpoint_to_json(result.outcome.net, &result.stats));
    return result;
}

inline CrossvalReport run_xval_experiment(const ExperimentConfig& cfg) {
    const std::filesystem::path dir(cfg.output_directory);
    std::filesystem::create_directories(dir);
    LoadedData data = load_experiment_data(cfg);
    write_json_file((dir / "config.json").string(), experiment_config_to_json(cfg));
    const CrossvalReport report = crossval(cfg.train, data.train, cfg.k_folds, cfg.train.seed);
    write_report_csv((dir / "report.csv").string(), report);
    return report;
}

// Rebuilds the plot data behind a finished run: prediction-versus-target
// rows for the evaluation split plus the trained activation shapes.
inline void run_plotdata(const std::string& run_directory, const std::string& out_directory) {
    const std::filesystem::path run_dir(run_directory);
    const ExperimentConfig cfg =
        parse_experiment_config(read_json_file((run_dir / "config.json").string()));
    StandardizeStats stats;
    const MlpNetwork net =
        checkpoint_from_json(read_json_file((run_dir / "checkpoint.json").string()), &stats);

    const bool has_test = std::filesystem::exists(run_dir / "test.csv");
    std::size_t n_inputs = net.n_in;
    std::size_t n_outputs = net.n_out;
    const Dataset eval_set =
        load_csv((run_dir / (has_test ? "test.csv" : "train.csv")).string(), n_inputs, n_outputs,
                 TaskKind::Approximation);

    Matrix x_std = eval_set.X;
    if (!stats.mean.empty()) apply_standardization(x_std, stats);
    const ForwardCache cache = forward(net, x_std);

    const std::filesystem::path out_dir(out_directory);
    std::filesystem::create_directories(out_dir);
    write_plotdata_csv((out_dir / "plotdata.csv").string(), eval_set.X, eval_set.T, cache.Y);
    write_activation_shapes_csv((out_dir / "activations.csv").string(), net.bank);
}

}  // namespace adact
