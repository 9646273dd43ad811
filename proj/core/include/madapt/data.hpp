#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "madapt/schema.hpp"

namespace madapt {

enum class Domain { source, target };
enum class SplitTag { train, validation, test };

class Example;

// Test seam proving label hygiene: every read of a ground-truth label goes
// through truth_* accessors, which report to the installed hook together
// with the current phase. Training loops switch the phase to `training`
// around gradient steps; the hygiene tests install a hook and assert that
// no held-out target label is ever read in that phase.
namespace label_audit {

enum class Phase { setup, training };

struct ReadEvent {
    const Example* example;
    int class_label;
    bool attribute_read;
    Phase phase;
};

using Hook = std::function<void(const ReadEvent&)>;

void set_hook(Hook h);
void clear_hook();
void set_phase(Phase p);
Phase phase();

// RAII phase switch used by the training loop.
struct ScopedPhase {
    explicit ScopedPhase(Phase p) : prev_(phase()) { set_phase(p); }
    ~ScopedPhase() { set_phase(prev_); }

private:
    Phase prev_;
};

void notify_read(const Example& ex, int class_label, bool attribute_read);

}  // namespace label_audit

// One data point. Ground-truth labels are private; training code may only
// use the visible_* accessors, which honor the labeled flag and never touch
// the truth when visibility is off. Evaluation and split construction use
// the truth_* accessors, which fire the label-audit hook.
class Example {
public:
    std::vector<double> features;
    Domain domain = Domain::source;

    Example() = default;
    Example(std::vector<double> f, Domain d) : features(std::move(f)), domain(d) {}

    // Attaches schema-consistent ground truth and marks the example labeled.
    void set_truth(int class_label, const AttributeSchema& schema);

    bool labeled() const { return labeled_; }
    bool has_truth() const { return class_label_.has_value(); }

    // Hides labels from training (labels stay stored for later evaluation).
    void hide_labels() { labeled_ = false; }
    void show_labels();

    // nullopt when the example is not labeled; never reads hidden truth.
    std::optional<int> visible_class_label() const;
    const std::vector<int>* visible_attribute_labels() const;

    // Ground-truth access; fires the label-audit hook.
    int truth_class_label() const;
    const std::vector<int>& truth_attribute_labels() const;

private:
    std::optional<int> class_label_;
    std::vector<int> attribute_labels_;
    bool labeled_ = false;
};

struct Dataset {
    AttributeSchema schema;
    std::vector<Example> examples;
    SplitTag split_tag = SplitTag::train;

    std::size_t dim() const { return examples.empty() ? 0 : examples[0].features.size(); }
    std::size_t count(Domain d) const;
    std::size_t count_labeled(Domain d) const;
};

// The dataset file stores rows only; the schema travels separately and is
// required to validate labels on load.
Dataset load_dataset(const std::string& path, const AttributeSchema& schema);
void save_dataset(const Dataset& ds, const std::string& path);

}  // namespace madapt
