#include "kbc/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kbc/error.hpp"

namespace kbc {

std::uint64_t effective_length(std::uint64_t word_count, int k) {
    require(k >= 1, "length regularizer k must be >= 1");
    return std::max<std::uint64_t>(static_cast<std::uint64_t>(k), word_count);
}

double abundance(const MatchProfile& tf, std::span<const double> idf, std::uint64_t length) {
    require(length >= 1, "effective length must be >= 1");
    double total = 0.0;
    for (const auto& [id, count] : tf.tf) {
        if (id >= idf.size())
            throw ValidationError("keyword id " + std::to_string(id) +
                                  " has no idf value: model/glossary mismatch");
        total += static_cast<double>(count) * idf[id] / static_cast<double>(length);
    }
    return total;
}

Distribution match_distribution(const MatchProfile& tf) {
    Distribution p;
    if (tf.total_matches == 0) return p;
    const double total = static_cast<double>(tf.total_matches);
    for (const auto& [id, count] : tf.tf)
        if (count > 0) p.emplace(id, static_cast<double>(count) / total);
    return p;
}

double shannon_entropy(std::span<const double> p) {
    if (p.empty()) return 0.0;
    double mass = 0.0;
    for (double v : p) {
        require(std::isfinite(v) && v >= 0.0, "probabilities must be finite and non-negative");
        mass += v;
    }
    // Summing n rounded quotients drifts by up to ~n ulp.
    const double tolerance =
        std::max(1e-12, 4.0 * static_cast<double>(p.size()) * std::numeric_limits<double>::epsilon());
    require(std::abs(mass - 1.0) <= tolerance, "probabilities must sum to 1");

    double entropy = 0.0;
    for (double v : p)
        if (v > 0.0) entropy -= v * std::log(v);
    return std::max(0.0, entropy);
}

double shannon_entropy(const Distribution& p) {
    std::vector<double> values;
    values.reserve(p.size());
    for (const auto& [_, v] : p) values.push_back(v);
    return shannon_entropy(values);
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

ScoreBreakdown raw_breakdown(std::string doc_id, std::uint64_t word_count, MatchProfile tf,
                             std::span<const double> idf, int k, ScoreMode mode) {
    ScoreBreakdown out;
    out.doc_id = std::move(doc_id);
    out.word_count = word_count;
    out.effective_length = effective_length(word_count, k);
    out.tf = std::move(tf);
    out.tfidf_over_L = abundance(out.tf, idf, out.effective_length);
    for (const auto& [id, count] : out.tf.tf)
        out.per_keyword.emplace(
            id, static_cast<double>(count) * idf[id] / static_cast<double>(out.effective_length));
    out.p = match_distribution(out.tf);
    out.entropy = shannon_entropy(out.p);
    out.raw_score = mode == ScoreMode::EntropyWeighted ? out.entropy * out.tfidf_over_L
                                                       : out.tfidf_over_L;
    return out;
}

void check_model_matches(const BackgroundModel& model, const Glossary& glossary) {
    if (model.glossary_digest != glossary.digest())
        throw ValidationError("model was trained for a different glossary");
    if (model.idf.size() != glossary.size())
        throw ValidationError("model keyword table does not match the glossary size");
}

ScoreBreakdown raw_score(const Document& doc, const Glossary& glossary,
                         const BackgroundModel& model) {
    check_model_matches(model, glossary);
    return raw_breakdown(doc.id, doc.word_count(), glossary.match(doc.tokens), model.idf,
                         model.k, model.mode);
}

void predict(ScoreBreakdown& breakdown, const BackgroundModel& model) {
    if (!(model.sigma > 0.0) || !std::isfinite(model.sigma))
        throw ValidationError("invalid model: sigma must be positive");
    breakdown.standardized = (breakdown.raw_score - model.mu) / model.sigma;
    breakdown.probability = sigmoid(breakdown.standardized - model.bias);
    breakdown.positive = breakdown.standardized >= model.bias;
}

ScoreBreakdown score(const Document& doc, const Glossary& glossary,
                     const BackgroundModel& model) {
    ScoreBreakdown out = raw_score(doc, glossary, model);
    predict(out, model);
    return out;
}

}  // namespace kbc
