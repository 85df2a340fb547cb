// Command-line front end: dataset generation, training, cross-validation,
// multiply-count tables, and plot-data export.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "adact/adact.hpp"

namespace {

using adact::json;

json load_config_with_overrides(const std::string& path, const CLI::App* cmd) {
    json doc = adact::read_json_file(path);
    auto opt_count = [cmd](const char* name) { return cmd->count(name) > 0; };
    if (!doc.is_object()) throw adact::ConfigError("", "config must be a JSON object");
    auto section = [&doc](const char* name) -> json& {
        if (!doc.contains(name)) doc[name] = json::object();
        return doc[name];
    };
    if (opt_count("--seed"))
        section("train")["seed"] = cmd->get_option("--seed")->as<std::int64_t>();
    if (opt_count("--trainer"))
        section("train")["trainer"] = cmd->get_option("--trainer")->as<std::string>();
    if (opt_count("--iters"))
        section("train")["N_it"] = cmd->get_option("--iters")->as<std::int64_t>();
    if (opt_count("--nh")) section("model")["N_h"] = cmd->get_option("--nh")->as<std::int64_t>();
    if (opt_count("--hinges"))
        section("model")["H"] = cmd->get_option("--hinges")->as<std::int64_t>();
    if (opt_count("--init"))
        section("model")["init_activation"] = cmd->get_option("--init")->as<std::string>();
    if (opt_count("--out"))
        section("output")["directory"] = cmd->get_option("--out")->as<std::string>();
    return doc;
}

void add_override_flags(CLI::App* cmd) {
    cmd->add_option("--seed", "override train.seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("--trainer", "override train.trainer");
    cmd->add_option("--iters", "override train.N_it")->check(CLI::PositiveNumber);
    cmd->add_option("--nh", "override model.N_h")->check(CLI::PositiveNumber);
    cmd->add_option("--hinges", "override model.H")->check(CLI::PositiveNumber);
    cmd->add_option("--init", "override model.init_activation");
    cmd->add_option("--out", "override output.directory");
}

int cmd_gen(const std::string& source, std::size_t n_train, std::size_t n_test,
            std::uint32_t seed, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    adact::Dataset train, test;
    if (source == "sine") {
        adact::SinePair pair = adact::gen_sine(n_train, n_test, seed);
        train = std::move(pair.train);
        test = std::move(pair.test);
    } else if (source == "rosenbrock") {
        train = adact::gen_rosenbrock(n_train, seed);
        test = adact::gen_rosenbrock(n_test, seed + 1);
    } else {
        std::cerr << "unknown source '" << source << "'; expected sine or rosenbrock\n";
        return 1;
    }
    adact::write_dataset_csv((fs::path(out_dir) / "train.csv").string(), train);
    adact::write_dataset_csv((fs::path(out_dir) / "test.csv").string(), test);
    std::cout << "wrote " << train.patterns() << " train and " << test.patterns()
              << " test patterns to " << out_dir << "\n";
    return 0;
}

int cmd_burden(std::int64_t n, std::int64_t nh, std::int64_t m, std::int64_t nv,
               std::int64_t hinges) {
    adact::BurdenInput in;
    in.n_in = n;
    in.n_hidden = nh;
    in.n_out = m;
    in.n_patterns = nv;
    in.n_hinges = hinges;
    in.validate();
    std::printf("multiplies per training iteration (N=%lld, N_h=%lld, M=%lld, N_v=%lld, hinges=%lld)\n",
                (long long)n, (long long)nh, (long long)m, (long long)nv, (long long)hinges);
    std::printf("  N_u=%lld  N_w=%lld\n", (long long)in.basis_count(), (long long)in.weight_count());
    std::printf("%-8s %20s\n", "algo", "multiplies");
    for (adact::BurdenKind kind :
         {adact::BurdenKind::Lm, adact::BurdenKind::Cg, adact::BurdenKind::Scg,
          adact::BurdenKind::Molf, adact::BurdenKind::AdAct, adact::BurdenKind::Ols})
        std::printf("%-8s %20lld\n", adact::burden_kind_name(kind),
                    (long long)adact::burden(kind, in));
    return 0;
}

int cmd_train(const json& doc) {
    const adact::ExperimentConfig cfg = adact::parse_experiment_config(doc);
    const adact::TrainArtifacts art = adact::run_train_experiment(cfg);
    const adact::IterationRecord& last = art.outcome.run.records.back();
    std::cout << "trainer=" << adact::trainer_name(cfg.train.trainer)
              << " iterations=" << art.outcome.run.records.size()
              << " final train_mse=" << adact::fmt_g17(last.train_mse);
    if (std::isfinite(last.val_mse))
        std::cout << " val_mse=" << adact::fmt_g17(last.val_mse);
    std::cout << "\nartifacts in " << art.directory.string() << "\n";
    return 0;
}

int cmd_xval(const json& doc) {
    const adact::ExperimentConfig cfg = adact::parse_experiment_config(doc);
    const adact::CrossvalReport report = adact::run_xval_experiment(cfg);
    std::printf("%-6s %18s %12s\n", "fold", "val_mse", "val_pe");
    for (std::size_t f = 0; f < report.folds.size(); ++f)
        std::printf("%-6zu %18.8g %12.4g\n", f, report.folds[f].mse, report.folds[f].pe);
    std::printf("%-6s %18.8g %12.4g\n", "mean", report.mean_mse, report.mean_pe);
    std::printf("%-6s %18.8g %12.4g\n", "std", report.std_mse, report.std_pe);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adact: adaptive piecewise-linear activation training laboratory"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset as CSV");
    std::string gen_source = "sine", gen_out = "data";
    std::size_t gen_train = 5000, gen_test = 100;
    std::uint32_t gen_seed = 1;
    gen->add_option("--source", gen_source, "sine or rosenbrock");
    gen->add_option("--n-train", gen_train, "training patterns")->check(CLI::PositiveNumber);
    gen->add_option("--n-test", gen_test, "test patterns")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory")->required();

    auto* train = app.add_subcommand("train", "run one training experiment from a config");
    std::string train_config;
    train->add_option("--config", train_config, "experiment config JSON")->required();
    add_override_flags(train);

    auto* xval = app.add_subcommand("xval", "k-fold cross-validation from a config");
    std::string xval_config;
    xval->add_option("--config", xval_config, "experiment config JSON")->required();
    add_override_flags(xval);

    auto* burden = app.add_subcommand("burden", "print the multiply-count table");
    std::int64_t b_n = 4, b_nh = 3, b_m = 2, b_nv = 10, b_hinges = 7;
    burden->add_option("--n", b_n, "inputs N")->check(CLI::PositiveNumber);
    burden->add_option("--nh", b_nh, "hidden units N_h")->check(CLI::PositiveNumber);
    burden->add_option("--m", b_m, "outputs M")->check(CLI::PositiveNumber);
    burden->add_option("--nv", b_nv, "patterns N_v")->check(CLI::PositiveNumber);
    burden->add_option("--hinges", b_hinges, "hinges per unit")->check(CLI::PositiveNumber);

    auto* plotdata = app.add_subcommand("plotdata", "export plot data for a finished run");
    std::string plot_run, plot_out;
    plotdata->add_option("--run", plot_run, "run directory (config.json + checkpoint.json)")
        ->required();
    plotdata->add_option("--out", plot_out, "output directory (defaults to the run directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_source, gen_train, gen_test, gen_seed, gen_out);
        if (train->parsed()) return cmd_train(load_config_with_overrides(train_config, train));
        if (xval->parsed()) return cmd_xval(load_config_with_overrides(xval_config, xval));
        if (burden->parsed()) return cmd_burden(b_n, b_nh, b_m, b_nv, b_hinges);
        if (plotdata->parsed()) {
            adact::run_plotdata(plot_run, plot_out.empty() ? plot_run : plot_out);
            return 0;
        }
    } catch (const adact::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
