#include "kbc/background.hpp"

#include <algorithm>
#include <cmath>

#include "kbc/error.hpp"
#include "kbc/parallel.hpp"
#include "kbc/scorer.hpp"

namespace kbc {

double idf_from_df(std::uint64_t df, std::uint64_t n_docs) {
    require(n_docs >= 1, "idf requires n_docs >= 1");
    require(df <= n_docs, "document frequency cannot exceed n_docs");
    return std::log(static_cast<double>(n_docs + 1) / static_cast<double>(df + 1)) + 1.0;
}

std::vector<double> idf_table(std::span<const std::uint64_t> df, std::uint64_t n_docs) {
    std::vector<double> idf;
    idf.reserve(df.size());
    for (auto d : df) idf.push_back(idf_from_df(d, n_docs));
    return idf;
}

DocumentFrequencies compute_df(const Glossary& glossary, const Corpus& corpus,
                               unsigned threads) {
    if (corpus.empty()) throw ValidationError("background corpus must be non-empty");
    const auto profiles = parallel_map<MatchProfile>(
        corpus.size(), [&](std::size_t i) { return glossary.match(corpus.documents[i].tokens); },
        threads);

    DocumentFrequencies out{corpus.size(), std::vector<std::uint64_t>(glossary.size(), 0)};
    for (const auto& profile : profiles)
        for (const auto& [id, count] : profile.tf)
            if (count > 0) ++out.df[id];
    return out;
}

Standardization standardization_of(std::span<const double> scores) {
    require(!scores.empty(), "standardization requires at least one score");
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    if (*lo == *hi)
        throw ValidationError("degenerate background corpus: zero score variance");

    const double n = static_cast<double>(scores.size());
    double sum = 0.0;
    for (double s : scores) sum += s;
    const double mu = sum / n;
    double squares = 0.0;
    for (double s : scores) squares += (s - mu) * (s - mu);
    const double sigma = std::sqrt(squares / n);
    if (!(sigma > 0.0))
        throw ValidationError("degenerate background corpus: zero score variance");
    return {mu, sigma};
}

Standardization fit_standardization(const Glossary& glossary, std::span<const double> idf,
                                    int k, const Corpus& corpus, ScoreMode mode,
                                    unsigned threads) {
    require(idf.size() == glossary.size(), "idf table must cover every glossary keyword");
    if (corpus.empty()) throw ValidationError("background corpus must be non-empty");
    const auto scores = parallel_map<double>(
        corpus.size(),
        [&](std::size_t i) {
            const auto& doc = corpus.documents[i];
            return raw_breakdown(doc.id, doc.word_count(), glossary.match(doc.tokens), idf, k,
                                 mode)
                .raw_score;
        },
        threads);
    return standardization_of(scores);
}

BackgroundModel train(const Glossary& glossary, const Corpus& corpus,
                      const TrainOptions& options) {
    require(options.k >= 1, "length regularizer k must be >= 1");
    auto freqs = compute_df(glossary, corpus, options.threads);

    BackgroundModel model;
    model.category = glossary.category();
    model.glossary_digest = glossary.digest();
    model.n_docs = freqs.n_docs;
    model.k = options.k;
    model.mode = options.mode;
    model.idf = idf_table(freqs.df, freqs.n_docs);
    model.df = std::move(freqs.df);
    for (KeywordId id = 0; id < glossary.size(); ++id)
        model.phrases.push_back(glossary.phrase_text(id));

    const auto fit =
        fit_standardization(glossary, model.idf, model.k, corpus, model.mode, options.threads);
    model.mu = fit.mu;
    model.sigma = fit.sigma;
    model.bias = kDefaultBias;
    return model;
}

}  // namespace kbc
