#include "kbc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "kbc/background.hpp"
#include "kbc/baseline_lr.hpp"
#include "kbc/calibration.hpp"
#include "kbc/error.hpp"
#include "kbc/eval_stats.hpp"
#include "kbc/experiments.hpp"
#include "kbc/glossary.hpp"
#include "kbc/model_io.hpp"
#include "kbc/parallel.hpp"
#include "kbc/scorer.hpp"
#include "kbc/text.hpp"

namespace kbc::cli {

namespace fs = std::filesystem;

std::string escape_field(const std::string& value) {
    std::string out;
    out.reserve(value.size());
    for (char c : value) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::vector<std::string> apply_config_defaults(std::vector<std::string> args,
                                               const std::string& config_content) {
    auto present = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.starts_with(flag + "=");
        });
    };
    std::vector<std::string> extra;
    for (const auto& r : parse_records(config_content)) {
        std::string name = r.key;
        std::replace(name.begin(), name.end(), '_', '-');
        const std::string flag = "--" + name;
        if (present(flag)) continue;
        if (r.value == "true" || r.value.empty()) {
            extra.push_back(flag);
        } else if (r.value != "false") {
            extra.push_back(flag);
            extra.push_back(r.value);
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

namespace {

struct Options {
    std::string glossary, background, model, negatives, positives, input, out, output;
    std::string suite, tables, lr_model, category, mode = "entropy", save_models;
    std::string format = "both";
    int k = kDefaultLengthRegularizer;
    double target_fpr = kDefaultTargetFpr;
    std::optional<double> bias;
    bool explain = false;
    unsigned threads = 0;
};

void emit(const Options& opt, std::ostream& out, const std::string& text) {
    if (opt.output.empty() || opt.output == "-") {
        out << text;
    } else {
        write_file_atomically(opt.output, text);
    }
}

ScoreMode parse_mode(const std::string& mode) {
    if (mode == "entropy") return ScoreMode::EntropyWeighted;
    if (mode == "abundance") return ScoreMode::AbundanceOnly;
    throw ValidationError("--mode must be 'entropy' or 'abundance'");
}

int cmd_train(const Options& opt, std::ostream& out) {
    const auto glossary = load_glossary(opt.glossary, opt.category);
    const auto corpus = load_corpus(opt.background, opt.threads);
    auto model = train(glossary, corpus, {opt.k, parse_mode(opt.mode), opt.threads});
    if (opt.bias) model = set_bias_direct(std::move(model), *opt.bias);
    write_model(model, opt.out);
    if (!opt.output.empty()) emit(opt, out, serialize_model(model));
    return kOk;
}

int cmd_calibrate(const Options& opt, std::ostream& out) {
    const std::string content = read_file(opt.model);
    const auto model = parse_model(content);
    CalibrationResult result;
    if (opt.bias) {
        result.bias = set_bias_direct(model, *opt.bias).bias;
        if (!opt.negatives.empty()) {
            const auto glossary = load_glossary(opt.glossary, opt.category);
            const auto negatives = load_corpus(opt.negatives, opt.threads);
            result.achieved_fpr = measure_fpr(set_bias_direct(model, result.bias), glossary,
                                              negatives, opt.threads);
            result.n_negatives = negatives.size();
        }
    } else {
        if (opt.negatives.empty())
            throw ValidationError("--negatives is required unless --bias is given");
        if (opt.glossary.empty())
            throw ValidationError("--glossary is required unless --bias is given");
        const auto glossary = load_glossary(opt.glossary, opt.category);
        const auto negatives = load_corpus(opt.negatives, opt.threads);
        result = calibrate_fpr(model, glossary, negatives, opt.target_fpr, opt.threads);
    }
    write_file_atomically(opt.model, replace_bias_record(content, result.bias));

    std::ostringstream text;
    text << "bias=" << format_real(result.bias)
         << "\tachieved_fpr=" << format_real(result.achieved_fpr)
         << "\ttarget_fpr=" << (opt.bias ? std::string("NA") : format_real(result.target_fpr))
         << "\tn_negatives=" << result.n_negatives << '\n';
    emit(opt, out, text.str());
    return kOk;
}

std::string score_record(const ScoreBreakdown& b, const Glossary& glossary, bool explain) {
    std::ostringstream line;
    line << "doc_id=" << escape_field(b.doc_id) << "\tword_count=" << b.word_count
         << "\tL=" << b.effective_length << "\ttfidf_over_L=" << format_real(b.tfidf_over_L)
         << "\tentropy=" << format_real(b.entropy) << "\traw_score=" << format_real(b.raw_score)
         << "\tstandardized=" << format_real(b.standardized)
         << "\tprobability=" << format_real(b.probability)
         << "\tdecision=" << (b.positive ? "positive" : "negative");
    if (explain) {
        line << "\tcontributions=";
        bool first = true;
        for (const auto& [id, contribution] : b.per_keyword) {
            std::string phrase = glossary.phrase_text(id);
            std::replace(phrase.begin(), phrase.end(), ' ', '_');
            line << (first ? "" : ",") << phrase << ':' << b.tf.tf.at(id) << ':'
                 << format_real(contribution);
            first = false;
        }
    }
    line << '\n';
    return std::move(line).str();
}

int cmd_score(const Options& opt, std::ostream& out) {
    const auto model = read_model(opt.model);
    const auto glossary = load_glossary(opt.glossary, opt.category);
    check_model_matches(model, glossary);
    const auto corpus = load_corpus(opt.input, opt.threads);
    const auto lines = parallel_map<std::string>(
        corpus.size(),
        [&](std::size_t i) {
            return score_record(score(corpus.documents[i], glossary, model), glossary,
                                opt.explain);
        },
        opt.threads);
    std::string text;
    for (const auto& l : lines) text += l;
    emit(opt, out, text);
    return kOk;
}

int cmd_evaluate(const Options& opt, std::ostream& out) {
    const auto positives = load_corpus(opt.positives, opt.threads);
    std::ostringstream text;
    if (!opt.lr_model.empty()) {
        const auto model = lr::read_lr(opt.lr_model);
        text << "classifier=logistic\trecall=" << format_real(recall(model, positives, opt.threads));
        if (!opt.negatives.empty()) {
            const auto negatives = load_corpus(opt.negatives, opt.threads);
            text << "\tfpr=" << format_real(recall(model, negatives, opt.threads))
                 << "\tn_neg=" << negatives.size();
        }
    } else {
        if (opt.model.empty() || opt.glossary.empty())
            throw ValidationError("evaluate needs --model and --glossary (or --lr-model)");
        const auto model = read_model(opt.model);
        const auto glossary = load_glossary(opt.glossary, opt.category);
        text << "classifier=knowledge-based\trecall="
             << format_real(recall(model, glossary, positives, opt.threads));
        if (!opt.negatives.empty()) {
            const auto negatives = load_corpus(opt.negatives, opt.threads);
            text << "\tfpr=" << format_real(measure_fpr(model, glossary, negatives, opt.threads))
                 << "\tn_neg=" << negatives.size();
        }
    }
    text << "\tn_pos=" << positives.size() << '\n';
    emit(opt, out, text.str());
    return kOk;
}

int cmd_experiment(const Options& opt, std::ostream& out, std::ostream& err, int which) {
    auto suite = load_suite(opt.suite, opt.threads);
    const auto report =
        which == 1 ? run_experiment1(suite)
                   : run_experiment2(suite, opt.save_models.empty()
                                                ? std::nullopt
                                                : std::optional<fs::path>(opt.save_models));
    std::string text;
    if (opt.format == "records" || opt.format == "both") text += format_report_records(report);
    if (opt.format == "table" || opt.format == "both") text += format_report_table(report);
    emit(opt, out, text);
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    return kOk;
}

int cmd_verify_tables(const Options& opt, std::ostream& out, std::ostream& err) {
    const auto result = stats::verify_tables(read_file(opt.tables));
    emit(opt, out, stats::format_table_verification(result));
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    if (!result.all_passed()) {
        err << "error: reported aggregates were not reproduced\n";
        return kValidationError;
    }
    return kOk;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    try {
        for (std::size_t i = 0; i < args.size(); ++i) {
            std::string config_path;
            if (args[i] == "--config" && i + 1 < args.size()) {
                config_path = args[i + 1];
                args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                           args.begin() + static_cast<std::ptrdiff_t>(i + 2));
            } else if (args[i].starts_with("--config=")) {
                config_path = args[i].substr(9);
                args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                continue;
            }
            args = apply_config_defaults(std::move(args), read_file(config_path));
            break;
        }
    } catch (const IoError& e) {
        err << "error: --config: " << e.what() << '\n';
        return kIoError;
    }

    CLI::App app{"Knowledge-based document classification with keyword entropy",
                 "entropy-classifier"};
    app.require_subcommand(1);
    Options opt;

    auto add_threads = [&](CLI::App* cmd) {
        cmd->add_option("--threads", opt.threads,
                        "Worker threads (0 = ENTROPY_CLASSIFIER_THREADS or hardware)");
    };
    auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--output", opt.output, "Write results here instead of standard output");
    };

    auto* train_cmd = app.add_subcommand("train", "Fit idf and score standardization on a background corpus");
    train_cmd->add_option("--glossary", opt.glossary, "Keyword glossary file")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--background", opt.background, "Background corpus (directory or line file)")->required()->check(CLI::ExistingPath);
    train_cmd->add_option("--out", opt.out, "Model file to write")->required();
    train_cmd->add_option("--k", opt.k, "Length regularizer")->check(CLI::PositiveNumber);
    train_cmd->add_option("--category", opt.category, "Category name (default: glossary file stem)");
    train_cmd->add_option("--mode", opt.mode, "entropy or abundance")->check(CLI::IsMember({"entropy", "abundance"}));
    train_cmd->add_option("--bias", opt.bias, "Initial bias in standard deviations");
    add_threads(train_cmd);
    add_output(train_cmd);

    auto* calibrate_cmd = app.add_subcommand("calibrate", "Set the model bias directly or for a target FPR");
    calibrate_cmd->add_option("--model", opt.model, "Model file (its bias record is rewritten)")->required()->check(CLI::ExistingFile);
    calibrate_cmd->add_option("--glossary", opt.glossary, "Keyword glossary file")->check(CLI::ExistingFile);
    calibrate_cmd->add_option("--negatives", opt.negatives, "Negative corpus")->check(CLI::ExistingPath);
    calibrate_cmd->add_option("--target-fpr", opt.target_fpr, "Target false-positive rate")->check(CLI::Range(0.0, 1.0));
    calibrate_cmd->add_option("--bias", opt.bias, "Set the bias directly instead of tuning");
    calibrate_cmd->add_option("--category", opt.category, "Category name");
    add_threads(calibrate_cmd);
    add_output(calibrate_cmd);

    auto* score_cmd = app.add_subcommand("score", "Score documents, one record per document");
    score_cmd->add_option("--model", opt.model, "Model file")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--glossary", opt.glossary, "Keyword glossary file")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--input", opt.input, "Corpus to score")->required()->check(CLI::ExistingPath);
    score_cmd->add_flag("--explain", opt.explain, "Append per-keyword contributions");
    score_cmd->add_option("--category", opt.category, "Category name");
    add_threads(score_cmd);
    add_output(score_cmd);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Measure recall (and FPR) of a saved model");
    evaluate_cmd->add_option("--model", opt.model, "Knowledge-based model file")->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--lr-model", opt.lr_model, "Logistic regression model file")->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--glossary", opt.glossary, "Keyword glossary file")->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--positives", opt.positives, "Positive corpus")->required()->check(CLI::ExistingPath);
    evaluate_cmd->add_option("--negatives", opt.negatives, "Negative corpus")->check(CLI::ExistingPath);
    evaluate_cmd->add_option("--category", opt.category, "Category name");
    add_threads(evaluate_cmd);
    add_output(evaluate_cmd);

    auto* exp1_cmd = app.add_subcommand("exp1", "Entropy versus abundance-only recall at matched FPR");
    auto* exp2_cmd = app.add_subcommand("exp2", "Knowledge-based versus logistic regression under distribution shift");
    for (auto* cmd : {exp1_cmd, exp2_cmd}) {
        cmd->add_option("--suite", opt.suite, "Experiment suite file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--format", opt.format, "records, table or both")->check(CLI::IsMember({"records", "table", "both"}));
        add_threads(cmd);
        add_output(cmd);
    }
    exp2_cmd->add_option("--save-models", opt.save_models, "Directory for per-category model files");

    auto* verify_cmd = app.add_subcommand("verify-tables", "Recompute published table aggregates and check them");
    verify_cmd->add_option("--golden-tables,tables", opt.tables, "Table file")->required()->check(CLI::ExistingFile);
    add_output(verify_cmd);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(opt, out);
        if (calibrate_cmd->parsed()) return cmd_calibrate(opt, out);
        if (score_cmd->parsed()) return cmd_score(opt, out);
        if (evaluate_cmd->parsed()) return cmd_evaluate(opt, out);
        if (exp1_cmd->parsed()) return cmd_experiment(opt, out, err, 1);
        if (exp2_cmd->parsed()) return cmd_experiment(opt, out, err, 2);
        if (verify_cmd->parsed()) return cmd_verify_tables(opt, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    }
    return kValidationError;
}

}  // namespace kbc::cli
