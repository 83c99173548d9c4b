#include "kbc/experiments.hpp"

#include <iomanip>
#include <map>
#include <sstream>

#include "kbc/error.hpp"
#include "kbc/model_io.hpp"
#include "kbc/parallel.hpp"
#include "kbc/scorer.hpp"

namespace kbc {

namespace fs = std::filesystem;

double recall(const BackgroundModel& model, const Glossary& glossary, const Corpus& positives,
              unsigned threads) {
    if (positives.empty()) throw ValidationError("positive corpus must be non-empty");
    const auto scores = standardized_scores(model, glossary, positives, threads);
    return static_cast<double>(count_at_or_above(scores, model.bias)) /
           static_cast<double>(scores.size());
}

double recall(const lr::LrModel& model, const Corpus& positives, unsigned threads) {
    if (positives.empty()) throw ValidationError("positive corpus must be non-empty");
    const auto z = lr::logits(model, positives, threads);
    return static_cast<double>(count_at_or_above(z, model.threshold_bias)) /
           static_cast<double>(z.size());
}

ExperimentSuite load_suite(const fs::path& path, unsigned threads) {
    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        const fs::path candidate(p);
        return candidate.is_absolute() ? candidate : base / candidate;
    };

    ExperimentSuite suite;
    suite.threads = threads;
    suite.lr.threads = threads;
    bool have_background = false, have_negatives = false;
    for (const auto& r : parse_records(read_file(path))) {
        const auto where = path.string() + ":" + std::to_string(r.line_number);
        const auto words = split_words(r.value);
        if (r.key == "background") {
            suite.background = load_corpus(resolve(r.value), threads);
            have_background = true;
        } else if (r.key == "negatives") {
            suite.negatives = load_corpus(resolve(r.value), threads);
            have_negatives = true;
        } else if (r.key == "k") {
            const auto k = parse_int(r.value, where);
            if (k < 1 || k > 1'000'000'000) throw ValidationError(where + ": k must be positive");
            suite.k = static_cast<int>(k);
        } else if (r.key == "target_fpr") {
            suite.target_fpr = parse_real(r.value, where);
            if (!(suite.target_fpr > 0.0 && suite.target_fpr < 1.0))
                throw ValidationError(where + ": target_fpr must lie in (0, 1)");
        } else if (r.key == "lr_l2") {
            suite.lr.l2 = parse_real(r.value, where);
        } else if (r.key == "lr_learning_rate") {
            suite.lr.learning_rate = parse_real(r.value, where);
        } else if (r.key == "lr_epochs") {
            suite.lr.epochs = parse_uint(r.value, where);
        } else if (r.key == "category") {
            if (words.size() != 3 && words.size() != 4)
                throw ValidationError(where + ": expected 'category <name> <glossary> <positives_a> [<positives_b>]'");
            CategoryInput input{load_glossary(resolve(words[1]), words[0]),
                                load_corpus(resolve(words[2]), threads), std::nullopt};
            if (words.size() == 4) input.positives_b = load_corpus(resolve(words[3]), threads);
            suite.categories.push_back(std::move(input));
        } else {
            throw ValidationError(where + ": unknown suite record '" + r.key + "'");
        }
    }
    if (!have_background) throw ValidationError(path.string() + ": missing 'background' record");
    if (!have_negatives) throw ValidationError(path.string() + ": missing 'negatives' record");
    if (suite.categories.empty()) throw ValidationError(path.string() + ": no categories");
    return suite;
}

void summarize(EvalReport& report, bool anova_over_changes) {
    report.aggregates.clear();
    report.anova.reset();

    std::vector<std::string> order;
    std::map<std::string, std::vector<const ClassifierEval*>> by_classifier;
    for (const auto& category : report.categories) {
        for (const auto& e : category.classifiers) {
            auto [it, fresh] = by_classifier.try_emplace(e.classifier);
            if (fresh) order.push_back(e.classifier);
            it->second.push_back(&e);
        }
    }

    std::vector<std::vector<double>> groups;
    for (const auto& name : order) {
        const auto& evals = by_classifier[name];
        ClassifierAggregate agg;
        agg.classifier = name;
        agg.n_categories = evals.size();
        std::vector<double> recall_a, recall_b, changes;
        for (const auto* e : evals) {
            recall_a.push_back(e->recall_a);
            if (e->recall_b) recall_b.push_back(*e->recall_b);
            if (e->fractional_change) changes.push_back(*e->fractional_change);
        }
        agg.mean_recall_a = stats::mean(recall_a);
        if (!recall_b.empty()) agg.mean_recall_b = stats::mean(recall_b);
        if (!changes.empty()) agg.mean_fractional_change = stats::mean(changes);
        agg.n_changes = changes.size();
        report.aggregates.push_back(agg);
        groups.push_back(anova_over_changes ? changes : recall_a);
    }

    bool testable = groups.size() >= 2;
    for (const auto& g : groups) testable = testable && g.size() >= 2;
    if (!testable) {
        report.warnings.push_back("ANOVA omitted: needs two classifiers with at least two values each");
        return;
    }
    try {
        report.anova = stats::one_way_anova(groups);
    } catch (const ContractError& e) {
        report.warnings.push_back(std::string("ANOVA omitted: ") + e.what());
    }
}

std::pair<Corpus, Corpus> split_alternating(const Corpus& corpus) {
    std::vector<Document> first, second;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        (i % 2 == 0 ? first : second).push_back(corpus.documents[i]);
    return {Corpus{std::move(first), corpus.source + "#train"},
            Corpus{std::move(second), corpus.source + "#heldout"}};
}

namespace {

struct CalibratedKb {
    BackgroundModel model;
    CalibrationResult calibration;
};

CalibratedKb calibrated_kb(const ExperimentSuite& suite, const Glossary& glossary,
                           ScoreMode mode) {
    CalibratedKb out;
    out.model = train(glossary, suite.background, {suite.k, mode, suite.threads});
    out.calibration =
        calibrate_fpr(out.model, glossary, suite.negatives, suite.target_fpr, suite.threads);
    out.model = set_bias_direct(std::move(out.model), out.calibration.bias);
    return out;
}

}  // namespace

EvalReport run_experiment1(const ExperimentSuite& suite) {
    EvalReport report;
    report.experiment = "exp1";
    for (const auto& input : suite.categories) {
        CategoryReport category{input.glossary.category(), {}};
        for (const auto& [name, mode] : {std::pair{"entropy", ScoreMode::EntropyWeighted},
                                         std::pair{"abundance", ScoreMode::AbundanceOnly}}) {
            const auto kb = calibrated_kb(suite, input.glossary, mode);
            ClassifierEval e;
            e.classifier = name;
            e.recall_a = recall(kb.model, input.glossary, input.positives_a, suite.threads);
            e.fpr = kb.calibration.achieved_fpr;
            e.bias = kb.model.bias;
            e.n_pos_a = input.positives_a.size();
            e.n_neg = kb.calibration.n_negatives;
            category.classifiers.push_back(std::move(e));
        }
        report.categories.push_back(std::move(category));
    }
    summarize(report, false);
    return report;
}

EvalReport run_experiment2(const ExperimentSuite& suite,
                           const std::optional<fs::path>& save_dir) {
    EvalReport report;
    report.experiment = "exp2";
    for (const auto& input : suite.categories) {
        const auto& name = input.glossary.category();
        if (!input.positives_b)
            throw ValidationError("category '" + name + "' has no B positives for experiment 2");
        auto [train_a, heldout_a] = split_alternating(input.positives_a);
        if (heldout_a.empty())
            throw ValidationError("category '" + name + "' needs at least two A positives");

        CategoryReport category{name, {}};

        const auto kb = calibrated_kb(suite, input.glossary, ScoreMode::EntropyWeighted);
        auto kb_eval = evaluate_pair("knowledge-based", heldout_a, *input.positives_b,
                                     [&](const Corpus& c) {
                                         return recall(kb.model, input.glossary, c, suite.threads);
                                     });
        kb_eval.fpr = kb.calibration.achieved_fpr;
        kb_eval.bias = kb.model.bias;
        kb_eval.n_neg = kb.calibration.n_negatives;

        CalibrationResult lr_cal;
        auto lr_model = lr::calibrate_lr_threshold(
            lr::train_lr(train_a, suite.background, suite.lr), suite.negatives, suite.target_fpr,
            &lr_cal, suite.threads);
        auto lr_eval = evaluate_pair("logistic", heldout_a, *input.positives_b,
                                     [&](const Corpus& c) {
                                         return recall(lr_model, c, suite.threads);
                                     });
        lr_eval.fpr = lr_cal.achieved_fpr;
        lr_eval.bias = lr_model.threshold_bias;
        lr_eval.n_neg = lr_cal.n_negatives;

        for (const auto* e : {&kb_eval, &lr_eval})
            if (!e->fractional_change)
                report.warnings.push_back(name + ": " + e->classifier +
                                          " recall on A is 0, fractional change excluded");

        if (save_dir) {
            fs::create_directories(*save_dir);
            write_model(kb.model, *save_dir / (name + ".kb"));
            lr::write_lr(lr_model, *save_dir / (name + ".lr"));
        }
        category.classifiers.push_back(std::move(kb_eval));
        category.classifiers.push_back(std::move(lr_eval));
        report.categories.push_back(std::move(category));
    }
    summarize(report, true);
    return report;
}

namespace {
std::string optional_real(const std::optional<double>& v) {
    return v ? format_real(*v) : std::string("NA");
}
std::string short_real(double v, int precision = 4) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return std::move(out).str();
}
std::string short_optional(const std::optional<double>& v) {
    return v ? short_real(*v) : std::string("-");
}
}  // namespace

std::string format_report_records(const EvalReport& report) {
    std::ostringstream out;
    for (const auto& category : report.categories) {
        for (const auto& e : category.classifiers) {
            out << "record=category\texperiment=" << report.experiment
                << "\tcategory=" << category.category << "\tclassifier=" << e.classifier
                << "\trecall_a=" << format_real(e.recall_a)
                << "\trecall_b=" << optional_real(e.recall_b)
                << "\tfractional_change=" << optional_real(e.fractional_change)
                << "\tfpr=" << format_real(e.fpr) << "\tbias=" << format_real(e.bias)
                << "\tn_pos_a=" << e.n_pos_a << "\tn_pos_b=" << e.n_pos_b
                << "\tn_neg=" << e.n_neg << '\n';
        }
    }
    for (const auto& a : report.aggregates) {
        out << "record=aggregate\texperiment=" << report.experiment
            << "\tclassifier=" << a.classifier << "\tmean_recall_a=" << format_real(a.mean_recall_a)
            << "\tmean_recall_b=" << optional_real(a.mean_recall_b)
            << "\tmean_fractional_change=" << optional_real(a.mean_fractional_change)
            << "\tn_categories=" << a.n_categories << "\tn_changes=" << a.n_changes << '\n';
    }
    if (report.anova) {
        const auto& r = *report.anova;
        out << "record=anova\texperiment=" << report.experiment
            << "\tf_stat=" << format_real(r.f_stat) << "\tdf_between=" << r.df_between
            << "\tdf_within=" << r.df_within << "\tp_value=" << format_real(r.p_value) << '\n';
    }
    for (const auto& w : report.warnings)
        out << "record=warning\texperiment=" << report.experiment << "\tmessage=" << w << '\n';
    return std::move(out).str();
}

std::string format_report_table(const EvalReport& report) {
    std::size_t width = 8;
    for (const auto& c : report.categories) width = std::max(width, c.category.size());
    std::size_t cwidth = 10;
    for (const auto& a : report.aggregates) cwidth = std::max(cwidth, a.classifier.size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "category" << "  "
        << std::setw(static_cast<int>(cwidth)) << "classifier" << std::right << std::setw(10)
        << "recall_A" << std::setw(10) << "recall_B" << std::setw(10) << "change" << std::setw(10)
        << "fpr" << '\n';
    for (const auto& c : report.categories) {
        for (const auto& e : c.classifiers) {
            out << std::left << std::setw(static_cast<int>(width)) << c.category << "  "
                << std::setw(static_cast<int>(cwidth)) << e.classifier << std::right
                << std::setw(10) << short_real(e.recall_a) << std::setw(10)
                << short_optional(e.recall_b) << std::setw(10)
                << short_optional(e.fractional_change) << std::setw(10) << short_real(e.fpr, 5)
                << '\n';
        }
    }
    for (const auto& a : report.aggregates) {
        out << std::left << std::setw(static_cast<int>(width)) << "mean" << "  "
            << std::setw(static_cast<int>(cwidth)) << a.classifier << std::right << std::setw(10)
            << short_real(a.mean_recall_a) << std::setw(10) << short_optional(a.mean_recall_b)
            << std::setw(10) << short_optional(a.mean_fractional_change) << '\n';
    }
    if (report.anova) {
        out << "one-way ANOVA: F=" << short_real(report.anova->f_stat) << " df=("
            << report.anova->df_between << ", " << report.anova->df_within
            << ") p=" << std::setprecision(6) << report.anova->p_value << '\n';
    }
    for (const auto& w : report.warnings) out << "warning: " << w << '\n';
    return std::move(out).str();
}

}  // namespace kbc
