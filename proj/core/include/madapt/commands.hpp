#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "madapt/configfile.hpp"
#include "madapt/generator.hpp"
#include "madapt/model.hpp"
#include "madapt/train.hpp"

namespace madapt {

// Generator knobs plus the random-shift scales the config exposes; the
// concrete shift matrix is drawn from the data seed when a cell runs.
struct GeneratorSpec {
    GeneratorConfig base;  // shift vectors filled per seed
    double shift_strength = 1.6;
    double shift_bias = 1.6;
};

// Fully-resolved experiment description: data recipe, model, training
// recipe, and the (mode, seed) matrix to run.
struct ExperimentSpec {
    GeneratorSpec generator;
    ModelConfig model;  // input_dim/heads filled from the schema
    TrainConfig train;
    std::vector<Mode> modes;
    std::vector<std::uint64_t> seeds;
};

AttributeSchema resolve_schema(const ConfigFile& cfg);
GeneratorSpec resolve_generator(const ConfigFile& cfg, const AttributeSchema& schema);
ModelConfig resolve_model(const ConfigFile& cfg, const AttributeSchema& schema,
                          std::size_t input_dim);
TrainConfig resolve_train(const ConfigFile& cfg, std::size_t num_attributes);
ExperimentSpec resolve_experiment(const ConfigFile& cfg);

// The three datasets of one experiment cell: training pool plus fresh
// single-domain draws for evaluation, all sharing prototypes and shift.
struct CellData {
    Dataset train;
    Dataset eval_source;
    Dataset eval_target;
};

CellData make_cell_data(const GeneratorSpec& spec, std::uint64_t data_seed);

struct RunOverrides {
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
};

// Command bodies behind the CLI; they throw the error taxonomy and leave
// exit-code mapping to the entry point. `out` receives the config echo and
// progress lines; artifact files stay free of timing so reruns are
// byte-identical.
void cmd_generate(const std::string& config_path, const std::string& out_dir, std::ostream& out);
void cmd_train(const std::string& data_dir, const std::string& config_path,
               const std::string& out_dir, const RunOverrides& overrides, std::ostream& out);
void cmd_eval(const std::string& checkpoint_path, const std::string& dataset_path,
              bool held_out_only, const std::string& out_dir, std::ostream& out);
void cmd_experiment(const std::string& config_path, const std::string& out_dir, std::ostream& out);

}  // namespace madapt
