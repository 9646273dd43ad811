#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "madapt/commands.hpp"
#include "madapt/error.hpp"

namespace {

// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric divergence.
int run(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const madapt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const madapt::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const madapt::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attribute-aided domain adaptation on synthetic two-domain data"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string data_dir;
    std::string checkpoint_path;
    std::string dataset_path;
    std::string mode_name;
    std::uint64_t seed = 0;
    bool held_out_only = false;

    CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset");
    generate->add_option("--config", config_path, "generator config file")->required();
    generate->add_option("--out", out_dir, "output directory")->required();

    CLI::App* train = app.add_subcommand("train", "train a model on a generated dataset");
    train->add_option("data", data_dir, "directory holding schema.txt and train.txt")->required();
    train->add_option("--config", config_path, "training config file")->required();
    train->add_option("--out", out_dir, "output directory")->required();
    CLI::Option* mode_opt = train->add_option("--mode", mode_name, "override the training mode");
    CLI::Option* seed_opt = train->add_option("--seed", seed, "override the training seed");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset file");
    eval->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();
    eval->add_option("dataset", dataset_path, "dataset file (schema.txt beside it)")->required();
    eval->add_flag("--held-out-only", held_out_only,
                   "restrict to the held-out classes of the checkpoint's split");
    eval->add_option("--out", out_dir, "directory for report.json and per_class.csv");

    CLI::App* experiment = app.add_subcommand("experiment", "run a mode x seed comparison");
    experiment->add_option("--config", config_path, "experiment config file")->required();
    experiment->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad flags are config errors
    }

    if (generate->parsed())
        return run([&] { madapt::cmd_generate(config_path, out_dir, std::cout); });
    if (train->parsed()) {
        madapt::RunOverrides overrides;
        if (mode_opt->count() > 0) overrides.mode = mode_name;
        if (seed_opt->count() > 0) overrides.seed = seed;
        return run([&] { madapt::cmd_train(data_dir, config_path, out_dir, overrides, std::cout); });
    }
    if (eval->parsed())
        return run([&] {
            madapt::cmd_eval(checkpoint_path, dataset_path, held_out_only, out_dir, std::cout);
        });
    return run([&] { madapt::cmd_experiment(config_path, out_dir, std::cout); });
}
