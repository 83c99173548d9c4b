#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kbc/background.hpp"
#include "kbc/baseline_lr.hpp"
#include "kbc/calibration.hpp"
#include "kbc/eval_stats.hpp"
#include "kbc/glossary.hpp"
#include "kbc/text.hpp"

namespace kbc {

// Fraction of the corpus classified positive.
double recall(const BackgroundModel& model, const Glossary& glossary, const Corpus& positives,
              unsigned threads = 0);
double recall(const lr::LrModel& model, const Corpus& positives, unsigned threads = 0);

struct CategoryInput {
    Glossary glossary;
    Corpus positives_a;
    std::optional<Corpus> positives_b;
};

// Inputs shared by both experiments. The background corpus trains idf and
// the standardization (and supplies LR negatives); the negative corpus is
// used only to calibrate thresholds and measure FPR.
struct ExperimentSuite {
    Corpus background;
    Corpus negatives;
    std::vector<CategoryInput> categories;
    int k = kDefaultLengthRegularizer;
    double target_fpr = kDefaultTargetFpr;
    lr::LrOptions lr;
    unsigned threads = 0;
};

// Suite file records; relative paths resolve against the file's directory:
//   background <corpus>      negatives <corpus>
//   k <int>                  target_fpr <real>
//   lr_l2 <real>             lr_learning_rate <real>      lr_epochs <int>
//   category <name> <glossary> <positives_a> [<positives_b>]
ExperimentSuite load_suite(const std::filesystem::path& path, unsigned threads = 0);

struct ClassifierEval {
    std::string classifier;
    double recall_a = 0.0;
    std::optional<double> recall_b;
    std::optional<double> fractional_change;
    double fpr = 0.0;
    double bias = 0.0;
    std::size_t n_pos_a = 0;
    std::size_t n_pos_b = 0;
    std::size_t n_neg = 0;
};

struct CategoryReport {
    std::string category;
    std::vector<ClassifierEval> classifiers;
};

struct ClassifierAggregate {
    std::string classifier;
    double mean_recall_a = 0.0;
    std::optional<double> mean_recall_b;
    std::optional<double> mean_fractional_change;
    std::size_t n_categories = 0;
    std::size_t n_changes = 0;
};

struct EvalReport {
    std::string experiment;
    std::vector<CategoryReport> categories;
    std::vector<ClassifierAggregate> aggregates;
    std::optional<stats::AnovaResult> anova;  // over recall_a (exp1) or changes (exp2)
    std::vector<std::string> warnings;
};

// Recomputes aggregates and ANOVA from the per-category entries.
// anova_over_changes selects fractional changes instead of recall_a.
void summarize(EvalReport& report, bool anova_over_changes);

// Splits a corpus into alternating halves by position: even -> first.
std::pair<Corpus, Corpus> split_alternating(const Corpus& corpus);

// Entropy-weighted versus abundance-only models at matched calibrated FPR.
EvalReport run_experiment1(const ExperimentSuite& suite);

// Entropy-weighted knowledge-based model versus logistic regression trained
// on the first half of set A; both evaluated on the held-out half of A and
// all of B. When save_dir is set, each category's models are written there.
EvalReport run_experiment2(const ExperimentSuite& suite,
                           const std::optional<std::filesystem::path>& save_dir = std::nullopt);

// Evaluates one classifier on two positive sets; swapping the sets swaps the
// recall columns exactly.
template <typename Classify>
ClassifierEval evaluate_pair(std::string name, const Corpus& set_a, const Corpus& set_b,
                             Classify&& recall_of) {
    ClassifierEval e;
    e.classifier = std::move(name);
    e.recall_a = recall_of(set_a);
    e.recall_b = recall_of(set_b);
    e.fractional_change = stats::fractional_change(e.recall_a, *e.recall_b);
    e.n_pos_a = set_a.size();
    e.n_pos_b = set_b.size();
    return e;
}

std::string format_report_records(const EvalReport& report);
std::string format_report_table(const EvalReport& report);

}  // namespace kbc
