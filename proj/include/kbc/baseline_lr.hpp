#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kbc/calibration.hpp"
#include "kbc/text.hpp"

namespace kbc::lr {

using FeatureId = std::uint32_t;

// Sparse, ordered by feature id.
using FeatureVector = std::map<FeatureId, double>;

class Vocabulary {
public:
    Vocabulary() = default;
    // Tokens must be unique; ids follow the given order.
    explicit Vocabulary(std::vector<std::string> tokens);

    // Tokens that occur in at least min_df documents, ids in lexicographic order.
    static Vocabulary build(std::span<const Corpus* const> corpora, std::size_t min_df = 2);

    std::size_t size() const { return tokens_.size(); }
    const std::string& token(FeatureId id) const { return tokens_.at(id); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const FeatureId* find(const std::string& token) const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.tokens_ == b.tokens_;
    }

private:
    std::vector<std::string> tokens_;
    std::map<std::string, FeatureId> ids_;
};

// Weights has vocabulary.size() + 1 entries; the last one is the intercept.
struct LrModel {
    Vocabulary vocabulary;
    std::vector<double> weights;
    double l2 = 0.0;
    double threshold_bias = 0.0;

    double intercept() const { return weights.back(); }
    friend bool operator==(const LrModel&, const LrModel&) = default;
};

struct TrainingSet {
    std::vector<FeatureVector> features;
    std::vector<double> labels;  // 1 = positive, 0 = negative
    std::size_t dimension = 0;   // number of non-intercept weights
};

struct LrOptions {
    double l2 = 1e-4;
    double learning_rate = 0.5;
    std::size_t epochs = 500;
    std::size_t min_df = 2;
    unsigned threads = 0;
};

// count(token) / word_count over in-vocabulary tokens.
FeatureVector featurize(const Document& doc, const Vocabulary& vocabulary);

// Mean logistic loss plus (l2/2)*|w|^2, intercept excluded from the penalty.
double loss(std::span<const double> weights, const TrainingSet& data, double l2,
            unsigned threads = 1);
std::vector<double> gradient(std::span<const double> weights, const TrainingSet& data,
                             double l2, unsigned threads = 1);

// Full-batch gradient descent from zero weights. loss_history, when given,
// receives the loss before the first step and after every epoch.
std::vector<double> fit_weights(const TrainingSet& data, const LrOptions& options,
                                std::vector<double>* loss_history = nullptr);

LrModel train_lr(const Corpus& positives, const Corpus& negatives,
                 const LrOptions& options = {}, std::vector<double>* loss_history = nullptr);

double logit(const LrModel& model, const FeatureVector& x);
double logit(const LrModel& model, const Document& doc);
double predict_lr(const LrModel& model, const Document& doc);
bool classify_lr(const LrModel& model, const Document& doc);

std::vector<double> logits(const LrModel& model, const Corpus& corpus, unsigned threads = 0);

// Same threshold rule as calibration::select_threshold, applied to logits.
LrModel calibrate_lr_threshold(LrModel model, const Corpus& negatives, double target_fpr,
                               CalibrationResult* result = nullptr, unsigned threads = 0);

std::string serialize_lr(const LrModel& model);
LrModel parse_lr(std::string_view content);
void write_lr(const LrModel& model, const std::filesystem::path& path);
LrModel read_lr(const std::filesystem::path& path);

}  // namespace kbc::lr
