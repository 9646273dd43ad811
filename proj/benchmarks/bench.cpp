// Hot paths of a training step at the default problem size.

#include <benchmark/benchmark.h>

#include <vector>

#include "madapt/generator.hpp"
#include "madapt/losses.hpp"
#include "madapt/metrics.hpp"
#include "madapt/model.hpp"
#include "madapt/tensor.hpp"

using namespace madapt;

namespace {

AttributeSchema bench_schema() {
    AttributeSchema schema;
    schema.num_classes = 8;
    const std::vector<std::pair<std::string, std::size_t>> attrs = {{"make", 4}, {"body", 3}};
    for (const auto& [name, categories] : attrs) {
        Attribute a;
        a.name = name;
        a.categories = categories;
        a.class_to_category.resize(schema.num_classes);
        for (std::size_t c = 0; c < schema.num_classes; ++c) {
            a.class_to_category[c] = c % categories;
        }
        schema.attributes.push_back(std::move(a));
    }
    return schema;
}

GeneratorConfig bench_generator(const AttributeSchema& schema) {
    GeneratorConfig g;
    g.schema = schema;
    g.dim = 16;
    g.source_counts.assign(schema.num_classes, 30);
    g.target_counts.assign(schema.num_classes, 30);
    make_random_shift(g.dim, 1.2, 1.2, 99, g.shift_matrix, g.shift_bias);
    g.seed = 7;
    return g;
}

struct Fixture {
    AttributeSchema schema = bench_schema();
    Dataset dataset;
    ModelConfig config;
    ModelParams params;
    Batch batch;
    SoftLabelBank bank;
    LossWeights weights;

    Fixture() {
        dataset = generate(bench_generator(schema));
        config = make_model_config(schema, 16, {32, 24}, 16, 16, 3);
        params = init_params(config);
        std::vector<const Example*> rows;
        for (std::size_t i = 0; i < dataset.examples.size() && rows.size() < 32; i += 7) {
            rows.push_back(&dataset.examples[i]);
        }
        batch = make_batch(rows, schema);
        bank = build_soft_labels(dataset, params, schema, 2.0);
        weights = LossWeights::defaults(schema.attributes.size());
    }
};

Fixture& fixture() {
    static Fixture fx;
    return fx;
}

void BM_GenerateDataset(benchmark::State& state) {
    GeneratorConfig g = bench_generator(bench_schema());
    for (auto _ : state) {
        Dataset ds = generate(g);
        benchmark::DoNotOptimize(ds.examples.data());
    }
}
BENCHMARK(BM_GenerateDataset);

void BM_ForwardFeatures(benchmark::State& state) {
    Fixture& fx = fixture();
    for (auto _ : state) {
        Tensor f = forward_features(fx.params, fx.batch.features);
        benchmark::DoNotOptimize(f.data.data());
    }
}
BENCHMARK(BM_ForwardFeatures);

void BM_TotalObjectiveForward(benchmark::State& state) {
    Fixture& fx = fixture();
    for (auto _ : state) {
        TotalObjective obj = total_objective(fx.batch, fx.params, fx.schema, fx.weights,
                                             &fx.bank, Protocol::semisup);
        benchmark::DoNotOptimize(obj.report.total);
    }
}
BENCHMARK(BM_TotalObjectiveForward);

void BM_TotalObjectiveBackward(benchmark::State& state) {
    Fixture& fx = fixture();
    for (auto _ : state) {
        Tape tape;
        ModelParams live = fx.params.register_on(tape);
        TotalObjective obj = total_objective(fx.batch, live, fx.schema, fx.weights, &fx.bank,
                                             Protocol::semisup);
        tape.backward(obj.total);
        benchmark::DoNotOptimize(tape.grad(obj.total).data());
    }
}
BENCHMARK(BM_TotalObjectiveBackward);

void BM_BuildSoftLabels(benchmark::State& state) {
    Fixture& fx = fixture();
    for (auto _ : state) {
        SoftLabelBank bank = build_soft_labels(fx.dataset, fx.params, fx.schema, 2.0);
        benchmark::DoNotOptimize(bank.class_soft.data());
    }
}
BENCHMARK(BM_BuildSoftLabels);

void BM_Evaluate(benchmark::State& state) {
    Fixture& fx = fixture();
    for (auto _ : state) {
        EvalReport report = evaluate(fx.params, fx.dataset, {});
        benchmark::DoNotOptimize(report.overall_accuracy);
    }
}
BENCHMARK(BM_Evaluate);

}  // namespace

BENCHMARK_MAIN();
