#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kbc/glossary.hpp"
#include "kbc/text.hpp"

namespace kbc {

inline constexpr int kDefaultLengthRegularizer = 100;
inline constexpr double kDefaultBias = 3.0;

// EntropyWeighted: s = S * tfidf/L. AbundanceOnly: s = tfidf/L, the
// keyword-count baseline used to isolate the entropy factor in experiments.
enum class ScoreMode { EntropyWeighted, AbundanceOnly };

// Everything needed to score a document for one category.
struct BackgroundModel {
    std::string category;
    std::string glossary_digest;
    std::uint64_t n_docs = 0;
    int k = kDefaultLengthRegularizer;
    double mu = 0.0;
    double sigma = 0.0;
    double bias = kDefaultBias;
    ScoreMode mode = ScoreMode::EntropyWeighted;
    std::vector<std::uint64_t> df;    // indexed by keyword id
    std::vector<double> idf;          // recomputed from df and n_docs
    std::vector<std::string> phrases; // space-joined, indexed by keyword id

    friend bool operator==(const BackgroundModel&, const BackgroundModel&) = default;
};

struct DocumentFrequencies {
    std::uint64_t n_docs = 0;
    std::vector<std::uint64_t> df;
};

// ln((n_docs + 1) / (df + 1)) + 1
double idf_from_df(std::uint64_t df, std::uint64_t n_docs);
std::vector<double> idf_table(std::span<const std::uint64_t> df, std::uint64_t n_docs);

DocumentFrequencies compute_df(const Glossary& glossary, const Corpus& corpus,
                               unsigned threads = 0);

struct Standardization {
    double mu = 0.0;
    double sigma = 0.0;
};

// Two-pass population mean and standard deviation in the given order.
// Throws ValidationError when every score is identical.
Standardization standardization_of(std::span<const double> scores);

Standardization fit_standardization(const Glossary& glossary, std::span<const double> idf,
                                    int k, const Corpus& corpus,
                                    ScoreMode mode = ScoreMode::EntropyWeighted,
                                    unsigned threads = 0);

struct TrainOptions {
    int k = kDefaultLengthRegularizer;
    ScoreMode mode = ScoreMode::EntropyWeighted;
    unsigned threads = 0;
};

BackgroundModel train(const Glossary& glossary, const Corpus& corpus,
                      const TrainOptions& options = {});

}  // namespace kbc
