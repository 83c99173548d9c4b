#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "kbc/background.hpp"
#include "kbc/glossary.hpp"
#include "kbc/text.hpp"

namespace kbc {

using Distribution = std::map<KeywordId, double>;

// Explainable result of scoring one document.
struct ScoreBreakdown {
    std::string doc_id;
    std::uint64_t word_count = 0;
    std::uint64_t effective_length = 0;
    MatchProfile tf;
    Distribution p;
    double tfidf_over_L = 0.0;
    double entropy = 0.0;
    double raw_score = 0.0;
    double standardized = 0.0;
    double probability = 0.0;
    bool positive = false;
    std::map<KeywordId, double> per_keyword;  // tf_w * idf_w / L
};

// max(k, word_count)
std::uint64_t effective_length(std::uint64_t word_count, int k);

// sum_w tf_w * idf_w / L, accumulated in ascending keyword id.
double abundance(const MatchProfile& tf, std::span<const double> idf, std::uint64_t length);

// p_w = tf_w / total_matches; empty when nothing matched.
Distribution match_distribution(const MatchProfile& tf);

// -sum p ln p in nats. Probabilities must be non-negative and sum to one.
double shannon_entropy(std::span<const double> p);
double shannon_entropy(const Distribution& p);

double sigmoid(double z);

// Fills everything up to raw_score from an already-computed match profile.
ScoreBreakdown raw_breakdown(std::string doc_id, std::uint64_t word_count, MatchProfile tf,
                             std::span<const double> idf, int k, ScoreMode mode);

// Matches the document and computes the raw score. The model must have been
// trained for this glossary.
ScoreBreakdown raw_score(const Document& doc, const Glossary& glossary,
                         const BackgroundModel& model);

// Standardizes, offsets by the bias and applies the sigmoid. The decision is
// positive iff standardized >= bias (equivalently probability >= 0.5).
void predict(ScoreBreakdown& breakdown, const BackgroundModel& model);

ScoreBreakdown score(const Document& doc, const Glossary& glossary,
                     const BackgroundModel& model);

void check_model_matches(const BackgroundModel& model, const Glossary& glossary);

}  // namespace kbc
