#pragma once

// Straight-from-the-formulas reference used only by tests. It shares no code
// with the library's matcher or scorer: phrases are matched by comparing every
// phrase at every position, and the score is assembled term by term.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace naive {

using Phrase = std::vector<std::string>;

// Leftmost-longest, non-overlapping, by exhaustive comparison.
inline std::map<Phrase, long> count_matches(const std::vector<Phrase>& phrases,
                                            const std::vector<std::string>& tokens) {
    std::map<Phrase, long> tf;
    std::size_t pos = 0;
    while (pos < tokens.size()) {
        const Phrase* best = nullptr;
        for (const auto& p : phrases) {
            if (p.empty() || pos + p.size() > tokens.size()) continue;
            if (!std::equal(p.begin(), p.end(), tokens.begin() + static_cast<long>(pos))) continue;
            if (!best || p.size() > best->size()) best = &p;
        }
        if (best) {
            ++tf[*best];
            pos += best->size();
        } else {
            ++pos;
        }
    }
    return tf;
}

inline double idf(long df, long n) {
    return std::log((static_cast<double>(n) + 1.0) / (static_cast<double>(df) + 1.0)) + 1.0;
}

struct Score {
    double abundance = 0.0;
    double entropy = 0.0;
    double raw = 0.0;
};

// idf_of maps each phrase to its idf.
inline Score raw_score(const std::vector<Phrase>& phrases,
                       const std::map<Phrase, double>& idf_of,
                       const std::vector<std::string>& tokens, long k, bool with_entropy = true) {
    const auto tf = count_matches(phrases, tokens);
    const double length = static_cast<double>(std::max<long>(k, static_cast<long>(tokens.size())));
    long total = 0;
    for (const auto& [_, c] : tf) total += c;

    Score s;
    for (const auto& [p, c] : tf) s.abundance += static_cast<double>(c) * idf_of.at(p) / length;
    for (const auto& [_, c] : tf) {
        const double pw = static_cast<double>(c) / static_cast<double>(total);
        s.entropy += -pw * std::log(pw);
    }
    s.raw = with_entropy ? s.entropy * s.abundance : s.abundance;
    return s;
}

inline double standardized(double raw, double mu, double sigma) { return (raw - mu) / sigma; }

inline double probability(double standardized_score, double bias) {
    return 1.0 / (1.0 + std::exp(-(standardized_score - bias)));
}

}  // namespace naive
