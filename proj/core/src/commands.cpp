#include "madapt/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "madapt/error.hpp"
#include "madapt/losses.hpp"
#include "madapt/metrics.hpp"
#include "madapt/textio.hpp"

namespace fs = std::filesystem;

namespace madapt {

namespace {

std::vector<std::size_t> resolve_counts(const ConfigFile& cfg, const std::string& scalar_key,
                                        const std::string& list_key, std::size_t classes,
                                        std::size_t fallback) {
    const bool has_list = cfg.has("generator", list_key);
    const bool has_scalar = cfg.has("generator", scalar_key);
    if (has_list && has_scalar)
        throw ConfigError("[generator] sets both " + scalar_key + " and " + list_key);
    if (has_list) {
        std::vector<std::uint64_t> raw = cfg.get_uint_list("generator", list_key);
        if (raw.size() != classes)
            throw ConfigError("[generator] " + list_key + " names " + std::to_string(raw.size()) +
                              " counts for " + std::to_string(classes) + " classes");
        return {raw.begin(), raw.end()};
    }
    const std::uint64_t per = cfg.get_uint("generator", scalar_key, fallback);
    return std::vector<std::size_t>(classes, static_cast<std::size_t>(per));
}

std::vector<double> resolve_weight_vector(const ConfigFile& cfg, const std::string& key,
                                          std::size_t num_attributes, double fallback) {
    if (!cfg.has("weights", key)) return std::vector<double>(num_attributes, fallback);
    std::vector<double> v = cfg.get_double_list("weights", key);
    if (v.size() == 1) return std::vector<double>(num_attributes, v[0]);
    if (v.size() != num_attributes)
        throw ConfigError("[weights] " + key + " needs 1 or " + std::to_string(num_attributes) +
                          " values, got " + std::to_string(v.size()));
    return v;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(v[i]);
    }
    return s;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_shortest(v[i]);
    }
    return s;
}

void echo_schema(std::ostream& out, const AttributeSchema& schema) {
    out << "[schema]\n";
    out << "classes = " << schema.num_classes << "\n";
    std::string attrs;
    for (std::size_t n = 0; n < schema.num_attributes(); ++n) {
        if (n) attrs += ", ";
        attrs += schema.attributes[n].name + ":" + std::to_string(schema.attributes[n].categories);
    }
    out << "attributes = " << attrs << "\n";
}

void echo_generator(std::ostream& out, const GeneratorSpec& spec) {
    const GeneratorConfig& g = spec.base;
    out << "[generator]\n";
    out << "dim = " << g.dim << "\n";
    out << "prototype_noise = " << format_shortest(g.prototype_noise) << "\n";
    out << "within_noise = " << format_shortest(g.within_noise) << "\n";
    out << "shift_strength = " << format_shortest(spec.shift_strength) << "\n";
    out << "shift_bias = " << format_shortest(spec.shift_bias) << "\n";
    out << "target_extra_noise = " << format_shortest(g.target_extra_noise) << "\n";
    out << "source_counts = " << join_sizes(g.source_counts) << "\n";
    out << "target_counts = " << join_sizes(g.target_counts) << "\n";
    out << "seed = " << g.seed << "\n";
}

void echo_model(std::ostream& out, const ModelConfig& model) {
    out << "[model]\n";
    out << "hidden = " << join_sizes(model.hidden) << "\n";
    out << "feature_dim = " << model.feature_dim << "\n";
    out << "domain_hidden = " << model.domain_hidden << "\n";
}

void echo_weights(std::ostream& out, const std::string& section, const LossWeights& w) {
    out << "[" << section << "]\n";
    out << "class_softmax = " << format_shortest(w.class_softmax) << "\n";
    out << "attribute_softmax = " << join_doubles(w.attribute_softmax) << "\n";
    out << "consistency = " << join_doubles(w.consistency) << "\n";
    out << "confusion = " << format_shortest(w.confusion) << "\n";
    out << "class_soft = " << format_shortest(w.class_soft) << "\n";
    out << "attribute_soft = " << format_shortest(w.attribute_soft) << "\n";
    out << "temperature = " << format_shortest(w.temperature) << "\n";
}

void echo_train(std::ostream& out, const TrainConfig& train) {
    out << "[train]\n";
    out << "learning_rate = " << format_shortest(train.learning_rate) << "\n";
    out << "momentum = " << format_shortest(train.momentum) << "\n";
    out << "batch_size = " << train.batch_size << "\n";
    out << "steps = " << train.steps << "\n";
    out << "mode = " << mode_to_string(train.mode) << "\n";
    out << "protocol = " << protocol_to_string(train.protocol) << "\n";
    out << "soft_label_refresh = " << train.soft_label_refresh << "\n";
    out << "checkpoint_period = " << train.checkpoint_period << "\n";
    out << "seed = " << train.seed << "\n";
    echo_weights(out, "weights", train.weights);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out.good()) throw DataError("cannot write file: " + path);
}

std::string sibling(const std::string& path, const std::string& name) {
    fs::path dir = fs::path(path).parent_path();
    if (dir.empty()) dir = ".";
    return (dir / name).string();
}

void save_split(const SplitPlan& plan, const std::string& path) {
    std::string text = "labeled_classes";
    for (std::size_t c : plan.labeled_classes) text += " " + std::to_string(c);
    text += "\nheld_out_classes";
    for (std::size_t c : plan.held_out_classes) text += " " + std::to_string(c);
    text += "\n";
    write_file(path, text);
}

SplitPlan load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open split file: " + path);
    SplitPlan plan;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno += 1;
        std::vector<std::string> toks = split_ws(trim(line));
        if (toks.empty()) continue;
        std::vector<std::size_t>* dest = nullptr;
        if (toks[0] == "labeled_classes")
            dest = &plan.labeled_classes;
        else if (toks[0] == "held_out_classes")
            dest = &plan.held_out_classes;
        else
            throw DataError(path + ":" + std::to_string(lineno) + ": unknown record '" + toks[0] +
                            "'");
        for (std::size_t i = 1; i < toks.size(); ++i) {
            const long long v =
                parse_int<DataError>(toks[i], path + ":" + std::to_string(lineno));
            if (v < 0) throw DataError(path + ": negative class id");
            dest->push_back(static_cast<std::size_t>(v));
        }
    }
    return plan;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

AttributeSchema resolve_schema(const ConfigFile& cfg) {
    AttributeSchema schema;
    schema.num_classes =
        static_cast<std::size_t>(cfg.get_uint("schema", "classes", 0));
    if (schema.num_classes == 0)
        throw ConfigError("[schema] classes must be set and positive");
    std::vector<std::string> specs = cfg.get_list("schema", "attributes");
    if (specs.empty()) throw ConfigError("[schema] attributes must name at least one attribute");
    for (const std::string& tok : specs) {
        std::vector<std::string> parts = split_on(tok, ':');
        if (parts.size() != 2 || trim(parts[0]).empty())
            throw ConfigError("[schema] attribute spec '" + tok + "' is not name:categories");
        Attribute attr;
        attr.name = trim(parts[0]);
        const long long cats = parse_int<ConfigError>(trim(parts[1]), "[schema] attributes");
        if (cats < 1) throw ConfigError("[schema] attribute '" + attr.name + "' needs >= 1 category");
        attr.categories = static_cast<std::size_t>(cats);
        attr.class_to_category.resize(schema.num_classes);
        for (std::size_t c = 0; c < schema.num_classes; ++c)
            attr.class_to_category[c] = c % attr.categories;
        schema.attributes.push_back(std::move(attr));
    }
    try {
        schema.validate();
    } catch (const DataError& e) {
        throw ConfigError(std::string("[schema] invalid: ") + e.what());
    }
    return schema;
}

GeneratorSpec resolve_generator(const ConfigFile& cfg, const AttributeSchema& schema) {
    GeneratorSpec spec;
    GeneratorConfig& g = spec.base;
    g.schema = schema;
    g.dim = static_cast<std::size_t>(cfg.get_uint("generator", "dim", 16));
    g.prototype_noise = cfg.get_double("generator", "prototype_noise", 0.5);
    g.within_noise = cfg.get_double("generator", "within_noise", 1.0);
    g.target_extra_noise = cfg.get_double("generator", "target_extra_noise", 0.5);
    spec.shift_strength = cfg.get_double("generator", "shift_strength", 1.2);
    spec.shift_bias = cfg.get_double("generator", "shift_bias", 1.2);
    g.source_counts = resolve_counts(cfg, "source_count", "source_counts", schema.num_classes, 30);
    g.target_counts = resolve_counts(cfg, "target_count", "target_counts", schema.num_classes, 60);
    g.seed = cfg.get_uint("generator", "seed", 1);
    return spec;
}

ModelConfig resolve_model(const ConfigFile& cfg, const AttributeSchema& schema,
                          std::size_t input_dim) {
    std::vector<std::size_t> hidden = {32, 24};
    if (cfg.has("model", "hidden")) {
        hidden.clear();
        for (std::uint64_t h : cfg.get_uint_list("model", "hidden"))
            hidden.push_back(static_cast<std::size_t>(h));
    }
    const auto feature_dim = static_cast<std::size_t>(cfg.get_uint("model", "feature_dim", 16));
    const auto domain_hidden = static_cast<std::size_t>(cfg.get_uint("model", "domain_hidden", 16));
    return make_model_config(schema, input_dim, hidden, feature_dim, domain_hidden, 0);
}

TrainConfig resolve_train(const ConfigFile& cfg, std::size_t num_attributes) {
    TrainConfig train;
    train.learning_rate = cfg.get_double("train", "learning_rate", 0.01);
    train.momentum = cfg.get_double("train", "momentum", 0.9);
    train.batch_size = static_cast<std::size_t>(cfg.get_uint("train", "batch_size", 32));
    train.steps = static_cast<std::size_t>(cfg.get_uint("train", "steps", 2000));
    train.mode = mode_from_string(cfg.get_string("train", "mode", "dc-att-acl"));
    train.protocol = protocol_from_string(cfg.get_string("train", "protocol", "unsup"));
    train.soft_label_refresh =
        static_cast<std::size_t>(cfg.get_uint("train", "soft_label_refresh", 1));
    train.checkpoint_period =
        static_cast<std::size_t>(cfg.get_uint("train", "checkpoint_period", 0));
    train.seed = cfg.get_uint("train", "seed", 0);

    LossWeights& w = train.weights;
    w.class_softmax = cfg.get_double("weights", "class_softmax", 1.0);
    w.attribute_softmax = resolve_weight_vector(cfg, "attribute_softmax", num_attributes, 1.0);
    w.consistency = resolve_weight_vector(cfg, "consistency", num_attributes, 2.0);
    w.confusion = cfg.get_double("weights", "confusion", 0.5);
    w.class_soft = cfg.get_double("weights", "class_soft", 0.5);
    w.attribute_soft = cfg.get_double("weights", "attribute_soft", 0.2);
    w.temperature = cfg.get_double("weights", "temperature", 2.0);
    return train;
}

ExperimentSpec resolve_experiment(const ConfigFile& cfg) {
    ExperimentSpec spec;
    AttributeSchema schema = resolve_schema(cfg);
    spec.generator = resolve_generator(cfg, schema);
    spec.model = resolve_model(cfg, schema, spec.generator.base.dim);
    spec.train = resolve_train(cfg, schema.num_attributes());

    std::vector<std::string> mode_names = cfg.get_list("experiment", "modes");
    if (mode_names.empty())
        mode_names = {"source-only", "source-plus-target", "source-att",
                      "source-att-acl", "dc", "dc-att-acl"};
    for (const std::string& name : mode_names) spec.modes.push_back(mode_from_string(name));

    spec.seeds = cfg.get_uint_list("experiment", "seeds");
    if (spec.seeds.empty()) spec.seeds = {0};
    return spec;
}

CellData make_cell_data(const GeneratorSpec& spec, std::uint64_t data_seed) {
    GeneratorConfig g = spec.base;
    g.seed = data_seed;
    make_random_shift(g.dim, spec.shift_strength, spec.shift_bias,
                      substream_seed(data_seed, "shift"), g.shift_matrix, g.shift_bias);
    CellData cell;
    g.sample_stream = 0;
    cell.train = generate(g);

    GeneratorConfig source_only = g;
    source_only.sample_stream = 1;
    source_only.target_counts.assign(source_only.target_counts.size(), 0);
    cell.eval_source = generate(source_only);

    GeneratorConfig target_only = g;
    target_only.sample_stream = 2;
    target_only.source_counts.assign(target_only.source_counts.size(), 0);
    cell.eval_target = generate(target_only);
    return cell;
}

void cmd_generate(const std::string& config_path, const std::string& out_dir, std::ostream& out) {
    ConfigFile cfg = ConfigFile::load(config_path);
    AttributeSchema schema = resolve_schema(cfg);
    GeneratorSpec spec = resolve_generator(cfg, schema);
    cfg.require_consumed({"schema", "generator"});

    echo_schema(out, schema);
    echo_generator(out, spec);

    CellData cell = make_cell_data(spec, spec.base.seed);
    ensure_dir(out_dir);
    const fs::path dir(out_dir);
    save_schema(schema, (dir / "schema.txt").string());
    save_dataset(cell.train, (dir / "train.txt").string());
    save_dataset(cell.eval_source, (dir / "eval_source.txt").string());
    save_dataset(cell.eval_target, (dir / "eval_target.txt").string());
    out << "wrote schema.txt, train.txt, eval_source.txt, eval_target.txt to " << out_dir << "\n";
}

void cmd_train(const std::string& data_dir, const std::string& config_path,
               const std::string& out_dir, const RunOverrides& overrides, std::ostream& out) {
    ConfigFile cfg = ConfigFile::load(config_path);
    // Reject a bad --mode before any data is touched.
    std::optional<Mode> mode_override;
    if (overrides.mode) mode_override = mode_from_string(*overrides.mode);

    const fs::path dir(data_dir);
    AttributeSchema schema = load_schema((dir / "schema.txt").string());
    Dataset dataset = load_dataset((dir / "train.txt").string(), schema);

    ModelConfig model = resolve_model(cfg, schema, dataset.dim());
    TrainConfig train_config = resolve_train(cfg, schema.num_attributes());
    cfg.require_consumed({"model", "train", "weights"});
    if (mode_override) train_config.mode = *mode_override;
    if (overrides.seed) train_config.seed = *overrides.seed;
    model.seed = substream_seed(train_config.seed, "model");

    echo_schema(out, schema);
    echo_model(out, model);
    echo_train(out, train_config);
    echo_weights(out, "weights.effective",
                 effective_weights(train_config.mode, train_config.protocol, train_config.weights,
                                   schema.num_attributes()));

    TrainResult result = train(dataset, model, train_config);

    ensure_dir(out_dir);
    const fs::path odir(out_dir);
    save_checkpoint(model, result.params, (odir / "checkpoint.txt").string());
    std::string log;
    for (const std::string& line : result.metrics_lines) log += line + "\n";
    write_file((odir / "metrics.jsonl").string(), log);
    save_split(result.split, (odir / "split.txt").string());
    out << "wrote checkpoint.txt, metrics.jsonl, split.txt to " << out_dir << "\n";
    out << "wall_seconds = " << fixed4(result.wall_seconds) << "\n";
}

void cmd_eval(const std::string& checkpoint_path, const std::string& dataset_path,
              bool held_out_only, const std::string& out_dir, std::ostream& out) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    AttributeSchema schema = load_schema(sibling(dataset_path, "schema.txt"));
    Dataset dataset = load_dataset(dataset_path, schema);

    out << "[eval]\n";
    out << "checkpoint = " << checkpoint_path << "\n";
    out << "dataset = " << dataset_path << "\n";
    out << "held_out_only = " << (held_out_only ? "true" : "false") << "\n";

    std::vector<std::size_t> subset;
    if (held_out_only) {
        SplitPlan plan = load_split(sibling(checkpoint_path, "split.txt"));
        subset = plan.held_out_classes;
        if (subset.empty())
            throw ConfigError("--held-out-only: the split holds out no classes");
    }
    EvalReport report = evaluate(ckpt.params, dataset, subset);

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        const fs::path odir(out_dir);
        write_file((odir / "report.json").string(), eval_report_to_json(report, schema) + "\n");
        std::ostringstream csv;
        write_per_class_csv(csv, report, nullptr);
        write_file((odir / "per_class.csv").string(), csv.str());
        out << "wrote report.json, per_class.csv to " << out_dir << "\n";
    }
    out << eval_report_to_json(report, schema) << "\n";
}

void cmd_experiment(const std::string& config_path, const std::string& out_dir,
                    std::ostream& out) {
    ConfigFile cfg = ConfigFile::load(config_path);
    ExperimentSpec spec = resolve_experiment(cfg);
    cfg.require_consumed({"schema", "generator", "model", "train", "weights", "experiment"});

    echo_schema(out, spec.generator.base.schema);
    echo_generator(out, spec.generator);
    echo_model(out, spec.model);
    echo_train(out, spec.train);
    out << "[experiment]\n";
    std::string mode_names;
    for (std::size_t i = 0; i < spec.modes.size(); ++i) {
        if (i) mode_names += ", ";
        mode_names += mode_to_string(spec.modes[i]);
    }
    out << "modes = " << mode_names << "\n";
    std::string seed_names;
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        if (i) seed_names += ", ";
        seed_names += std::to_string(spec.seeds[i]);
    }
    out << "seeds = " << seed_names << "\n";

    struct CellResult {
        double source = 0.0;
        double target = 0.0;
        double held_out = 0.0;
        EvalReport target_report;
    };
    // results[mode][seed]
    std::vector<std::vector<CellResult>> results(
        spec.modes.size(), std::vector<CellResult>(spec.seeds.size()));

    for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
        const std::uint64_t run_seed = spec.seeds[si];
        CellData cell = make_cell_data(spec.generator, substream_seed(run_seed, "data"));
        ModelConfig model = spec.model;
        model.seed = substream_seed(run_seed, "model");

        for (std::size_t mi = 0; mi < spec.modes.size(); ++mi) {
            TrainConfig tc = spec.train;
            tc.mode = spec.modes[mi];
            tc.seed = run_seed;

            const auto t0 = std::chrono::steady_clock::now();
            TrainResult run = train(cell.train, model, tc);
            CellResult& r = results[mi][si];
            r.source = evaluate(run.params, cell.eval_source).overall_accuracy;
            r.target_report = evaluate(run.params, cell.eval_target);
            r.target = r.target_report.overall_accuracy;
            r.held_out =
                evaluate(run.params, cell.eval_target, run.split.held_out_classes).overall_accuracy;
            const auto t1 = std::chrono::steady_clock::now();
            out << "# mode=" << mode_to_string(spec.modes[mi]) << " seed=" << run_seed
                << " source=" << fixed4(r.source) << " target=" << fixed4(r.target)
                << " held_out=" << fixed4(r.held_out) << " ("
                << fixed4(std::chrono::duration<double>(t1 - t0).count()) << "s)\n";
        }
    }

    ensure_dir(out_dir);
    const fs::path odir(out_dir);

    std::string csv = "mode,seed,source_accuracy,target_accuracy,held_out_accuracy\n";
    for (std::size_t mi = 0; mi < spec.modes.size(); ++mi) {
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
            const CellResult& r = results[mi][si];
            csv += mode_to_string(spec.modes[mi]) + "," + std::to_string(spec.seeds[si]) + "," +
                   format_shortest(r.source) + "," + format_shortest(r.target) + "," +
                   format_shortest(r.held_out) + "\n";
        }
    }
    write_file((odir / "results.csv").string(), csv);

    std::ostringstream summary;
    summary << "mode                  target             held_out           source\n";
    for (std::size_t mi = 0; mi < spec.modes.size(); ++mi) {
        std::vector<double> target, held_out, source;
        for (const CellResult& r : results[mi]) {
            target.push_back(r.target);
            held_out.push_back(r.held_out);
            source.push_back(r.source);
        }
        char row[160];
        std::snprintf(row, sizeof(row), "%-20s  %.4f +/- %.4f  %.4f +/- %.4f  %.4f +/- %.4f\n",
                      mode_to_string(spec.modes[mi]).c_str(), mean_of(target), sd_of(target),
                      mean_of(held_out), sd_of(held_out), mean_of(source), sd_of(source));
        summary << row;
    }

    if (spec.modes.size() >= 2) {
        // Seed-mean per-class gain of the last configured mode over the first.
        const std::vector<CellResult>& first = results.front();
        const std::vector<CellResult>& last = results.back();
        const std::vector<std::size_t>& classes = first[0].target_report.evaluated_classes;
        const auto seeds_n = static_cast<double>(spec.seeds.size());

        GainReport gain;
        gain.classes = classes;
        std::size_t improved = 0, unchanged = 0, worse = 0;
        for (std::size_t c : classes) {
            double base_mean = 0.0, adapted_mean = 0.0;
            for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
                base_mean += first[si].target_report.per_class_accuracy[c];
                adapted_mean += last[si].target_report.per_class_accuracy[c];
            }
            base_mean /= seeds_n;
            adapted_mean /= seeds_n;
            gain.baseline.push_back(base_mean);
            gain.adapted.push_back(adapted_mean);
            gain.delta.push_back(adapted_mean - base_mean);
            if (std::abs(adapted_mean - base_mean) < kGainEpsilon)
                unchanged += 1;
            else if (adapted_mean > base_mean)
                improved += 1;
            else
                worse += 1;
        }
        const auto n = static_cast<double>(classes.size());
        gain.improved_fraction = static_cast<double>(improved) / n;
        gain.unchanged_fraction = static_cast<double>(unchanged) / n;
        gain.worse_fraction = static_cast<double>(worse) / n;

        std::string gains_csv = "class_id,source_labels,baseline_accuracy,adapted_accuracy,delta\n";
        for (std::size_t i = 0; i < classes.size(); ++i) {
            gains_csv += std::to_string(classes[i]) + "," +
                         std::to_string(spec.generator.base.source_counts[classes[i]]) + "," +
                         format_shortest(gain.baseline[i]) + "," +
                         format_shortest(gain.adapted[i]) + "," + format_shortest(gain.delta[i]) +
                         "\n";
        }
        write_file((odir / "gains.csv").string(), gains_csv);

        summary << "\nper-class gain, seed-mean (" << mode_to_string(spec.modes.back()) << " - "
                << mode_to_string(spec.modes.front()) << "):\n";
        summary << "improved " << format_shortest(gain.improved_fraction) << "  unchanged "
                << format_shortest(gain.unchanged_fraction) << "  worse "
                << format_shortest(gain.worse_fraction) << "\n";
        std::vector<std::size_t> labels(spec.generator.base.source_counts.begin(),
                                        spec.generator.base.source_counts.end());
        summary << "gain_label_correlation = ";
        try {
            summary << format_shortest(gain_label_correlation(gain, labels)) << "\n";
        } catch (const NumericError&) {
            summary << "undefined (zero variance)\n";
        }
    }
    write_file((odir / "summary.txt").string(), summary.str());
    out << "wrote results.csv"
        << (spec.modes.size() >= 2 ? ", gains.csv" : "") << ", summary.txt to " << out_dir << "\n";
    out << summary.str();
}

}  // namespace madapt
