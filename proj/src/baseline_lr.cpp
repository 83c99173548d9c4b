#include "kbc/baseline_lr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kbc/error.hpp"
#include "kbc/model_io.hpp"
#include "kbc/parallel.hpp"
#include "kbc/scorer.hpp"

namespace kbc::lr {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (FeatureId id = 0; id < tokens_.size(); ++id)
        if (!ids_.emplace(tokens_[id], id).second)
            throw ValidationError("duplicate vocabulary token '" + tokens_[id] + "'");
}

Vocabulary Vocabulary::build(std::span<const Corpus* const> corpora, std::size_t min_df) {
    std::map<std::string, std::size_t> df;
    for (const Corpus* corpus : corpora) {
        for (const auto& doc : corpus->documents) {
            std::vector<std::string> unique(doc.tokens.begin(), doc.tokens.end());
            std::sort(unique.begin(), unique.end());
            unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
            for (auto& t : unique) ++df[std::move(t)];
        }
    }
    std::vector<std::string> tokens;
    for (auto& [token, count] : df)
        if (count >= min_df) tokens.push_back(token);
    return Vocabulary(std::move(tokens));
}

const FeatureId* Vocabulary::find(const std::string& token) const {
    const auto it = ids_.find(token);
    return it == ids_.end() ? nullptr : &it->second;
}

FeatureVector featurize(const Document& doc, const Vocabulary& vocabulary) {
    FeatureVector x;
    if (doc.tokens.empty()) return x;
    std::map<FeatureId, std::size_t> counts;
    for (const auto& t : doc.tokens)
        if (const FeatureId* id = vocabulary.find(t)) ++counts[*id];
    const double n = static_cast<double>(doc.word_count());
    for (const auto& [id, c] : counts) x.emplace(id, static_cast<double>(c) / n);
    return x;
}

namespace {

double dot(std::span<const double> weights, const FeatureVector& x) {
    double z = weights.back();
    for (const auto& [id, v] : x) z += weights[id] * v;
    return z;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_shape(std::span<const double> weights, const TrainingSet& data) {
    require(weights.size() == data.dimension + 1, "weight vector has the wrong length");
    require(data.features.size() == data.labels.size(), "features and labels differ in count");
    require(!data.features.empty(), "training set must be non-empty");
}

}  // namespace

double loss(std::span<const double> weights, const TrainingSet& data, double l2,
            unsigned threads) {
    check_shape(weights, data);
    const auto terms = parallel_map<double>(
        data.features.size(),
        [&](std::size_t i) {
            const double z = dot(weights, data.features[i]);
            return softplus(z) - data.labels[i] * z;
        },
        threads);
    double total = 0.0;
    for (double t : terms) total += t;
    double penalty = 0.0;
    for (std::size_t j = 0; j + 1 < weights.size(); ++j) penalty += weights[j] * weights[j];
    return total / static_cast<double>(terms.size()) + 0.5 * l2 * penalty;
}

std::vector<double> gradient(std::span<const double> weights, const TrainingSet& data,
                             double l2, unsigned threads) {
    check_shape(weights, data);
    const auto residuals = parallel_map<double>(
        data.features.size(),
        [&](std::size_t i) { return sigmoid(dot(weights, data.features[i])) - data.labels[i]; },
        threads);

    std::vector<double> grad(weights.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(residuals.size());
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        for (const auto& [id, v] : data.features[i]) grad[id] += residuals[i] * v;
        grad.back() += residuals[i];
    }
    for (std::size_t j = 0; j < grad.size(); ++j) {
        grad[j] *= inv_n;
        if (j + 1 < grad.size()) grad[j] += l2 * weights[j];
    }
    return grad;
}

std::vector<double> fit_weights(const TrainingSet& data, const LrOptions& options,
                                std::vector<double>* loss_history) {
    require(options.l2 >= 0.0 && std::isfinite(options.l2), "l2 must be finite and >= 0");
    require(options.learning_rate > 0.0 && std::isfinite(options.learning_rate),
            "learning rate must be positive");
    std::vector<double> weights(data.dimension + 1, 0.0);
    auto record = [&] {
        if (!loss_history) return;
        loss_history->push_back(loss(weights, data, options.l2, options.threads));
    };
    record();
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        const auto grad = gradient(weights, data, options.l2, options.threads);
        for (std::size_t j = 0; j < weights.size(); ++j)
            weights[j] -= options.learning_rate * grad[j];
        const double current = loss(weights, data, options.l2, options.threads);
        if (!std::isfinite(current))
            throw ValidationError("logistic regression diverged at epoch " +
                                  std::to_string(epoch + 1) + "; try a smaller learning rate");
        if (loss_history) loss_history->push_back(current);
    }
    return weights;
}

LrModel train_lr(const Corpus& positives, const Corpus& negatives, const LrOptions& options,
                 std::vector<double>* loss_history) {
    if (positives.empty()) throw ValidationError("positive training corpus must be non-empty");
    if (negatives.empty()) throw ValidationError("negative training corpus must be non-empty");

    const Corpus* corpora[] = {&positives, &negatives};
    LrModel model;
    model.vocabulary = Vocabulary::build(corpora, options.min_df);
    model.l2 = options.l2;

    TrainingSet data;
    data.dimension = model.vocabulary.size();
    for (const auto* corpus : corpora) {
        const double label = corpus == &positives ? 1.0 : 0.0;
        for (const auto& doc : corpus->documents) {
            data.features.push_back(featurize(doc, model.vocabulary));
            data.labels.push_back(label);
        }
    }
    model.weights = fit_weights(data, options, loss_history);
    return model;
}

double logit(const LrModel& model, const FeatureVector& x) { return dot(model.weights, x); }

double logit(const LrModel& model, const Document& doc) {
    return logit(model, featurize(doc, model.vocabulary));
}

double predict_lr(const LrModel& model, const Document& doc) {
    return sigmoid(logit(model, doc) - model.threshold_bias);
}

bool classify_lr(const LrModel& model, const Document& doc) {
    return logit(model, doc) >= model.threshold_bias;
}

std::vector<double> logits(const LrModel& model, const Corpus& corpus, unsigned threads) {
    return parallel_map<double>(
        corpus.size(), [&](std::size_t i) { return logit(model, corpus.documents[i]); }, threads);
}

LrModel calibrate_lr_threshold(LrModel model, const Corpus& negatives, double target_fpr,
                               CalibrationResult* result, unsigned threads) {
    if (negatives.empty()) throw ValidationError("negative corpus must be non-empty");
    const auto chosen = select_threshold(logits(model, negatives, threads), target_fpr);
    model.threshold_bias = chosen.bias;
    if (result) *result = chosen;
    return model;
}

std::string serialize_lr(const LrModel& model) {
    require(model.weights.size() == model.vocabulary.size() + 1,
            "weight vector does not match vocabulary");
    std::ostringstream out;
    out << "format_version " << kModelFormatVersion << '\n'
        << "l2 " << format_real(model.l2) << '\n'
        << "threshold_bias " << format_real(model.threshold_bias) << '\n';
    for (FeatureId id = 0; id < model.vocabulary.size(); ++id)
        out << "feat " << id << ' ' << model.vocabulary.token(id) << ' '
            << format_real(model.weights[id]) << '\n';
    out << "intercept " << format_real(model.intercept()) << '\n';
    return std::move(out).str();
}

LrModel parse_lr(std::string_view content) {
    std::vector<std::string> tokens;
    std::vector<double> weights;
    bool have_version = false, have_l2 = false, have_threshold = false, have_intercept = false;
    double l2 = 0.0, threshold = 0.0, intercept = 0.0;
    for (const auto& r : parse_records(content)) {
        const auto where = "LR model line " + std::to_string(r.line_number);
        if (r.key == "feat") {
            const auto words = split_words(r.value);
            if (words.size() != 3) throw ValidationError(where + ": malformed feat record");
            if (parse_uint(words[0], where + " feature id") != tokens.size())
                throw ValidationError(where + ": feature ids must be dense and ascending");
            tokens.push_back(words[1]);
            weights.push_back(parse_real(words[2], where + " weight"));
        } else if (r.key == "format_version") {
            if (parse_int(r.value, where) != kModelFormatVersion)
                throw ValidationError("unsupported LR model format_version");
            have_version = true;
        } else if (r.key == "l2") {
            l2 = parse_real(r.value, where);
            have_l2 = true;
        } else if (r.key == "threshold_bias") {
            threshold = parse_real(r.value, where);
            have_threshold = true;
        } else if (r.key == "intercept") {
            intercept = parse_real(r.value, where);
            have_intercept = true;
        } else {
            throw ValidationError(where + ": unknown record '" + r.key + "'");
        }
    }
    if (!have_version || !have_l2 || !have_threshold || !have_intercept)
        throw ValidationError("LR model is missing a required record");
    LrModel model;
    model.vocabulary = Vocabulary(std::move(tokens));
    model.weights = std::move(weights);
    model.weights.push_back(intercept);
    model.l2 = l2;
    model.threshold_bias = threshold;
    return model;
}

void write_lr(const LrModel& model, const std::filesystem::path& path) {
    write_file_atomically(path, serialize_lr(model));
}

LrModel read_lr(const std::filesystem::path& path) { return parse_lr(read_file(path)); }

}  // namespace kbc::lr
