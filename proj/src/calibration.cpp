#include "kbc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "kbc/error.hpp"
#include "kbc/parallel.hpp"
#include "kbc/scorer.hpp"

namespace kbc {

double threshold_step(double value) { return std::max(1e-9, std::abs(value) * 1e-9); }

std::size_t count_at_or_above(std::span<const double> scores, double threshold) {
    return static_cast<std::size_t>(
        std::count_if(scores.begin(), scores.end(), [&](double s) { return s >= threshold; }));
}

namespace {

// Largest m with m / n <= target, computed in the same arithmetic used to
// report the achieved rate so the guarantee holds exactly.
std::size_t allowed_false_positives(double target, std::size_t n) {
    const double dn = static_cast<double>(n);
    auto m = static_cast<std::size_t>(std::floor(target * dn));
    m = std::min(m, n - 1);
    while (m > 0 && static_cast<double>(m) / dn > target) --m;
    while (m + 1 < n && static_cast<double>(m + 1) / dn <= target) ++m;
    return m;
}

}  // namespace

CalibrationResult select_threshold(std::span<const double> negative_scores, double target_fpr) {
    require(target_fpr > 0.0 && target_fpr < 1.0, "target FPR must lie in (0, 1)");
    if (negative_scores.empty()) throw ValidationError("negative corpus must be non-empty");
    for (double s : negative_scores) require(std::isfinite(s), "negative scores must be finite");

    std::vector<double> sorted(negative_scores.begin(), negative_scores.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const std::size_t n = sorted.size();
    const std::size_t m = allowed_false_positives(target_fpr, n);

    double bias;
    if (m > 0 && sorted[m] < sorted[m - 1]) {
        bias = sorted[m - 1];
    } else {
        // Ties straddle the budget (or no false positive is allowed): move just
        // above the value at position m, but never past the next larger score.
        const double v = m > 0 ? sorted[m] : sorted[0];
        bias = v + threshold_step(v);
        const auto above = std::find_if(sorted.rbegin(), sorted.rend(),
                                        [&](double s) { return s > v; });
        if (above != sorted.rend()) bias = std::min(bias, *above);
    }

    CalibrationResult result;
    result.bias = bias;
    result.n_negatives = n;
    result.target_fpr = target_fpr;
    result.achieved_fpr =
        static_cast<double>(count_at_or_above(sorted, bias)) / static_cast<double>(n);
    return result;
}

BackgroundModel set_bias_direct(BackgroundModel model, double bias) {
    require(std::isfinite(bias), "bias must be finite");
    model.bias = bias;
    return model;
}

std::vector<double> standardized_scores(const BackgroundModel& model, const Glossary& glossary,
                                        const Corpus& corpus, unsigned threads) {
    check_model_matches(model, glossary);
    return parallel_map<double>(
        corpus.size(),
        [&](std::size_t i) { return score(corpus.documents[i], glossary, model).standardized; },
        threads);
}

CalibrationResult calibrate_fpr(const BackgroundModel& model, const Glossary& glossary,
                                const Corpus& negatives, double target_fpr, unsigned threads) {
    require(target_fpr > 0.0 && target_fpr < 1.0, "target FPR must lie in (0, 1)");
    if (negatives.empty()) throw ValidationError("negative corpus must be non-empty");
    return select_threshold(standardized_scores(model, glossary, negatives, threads), target_fpr);
}

double measure_fpr(const BackgroundModel& model, const Glossary& glossary,
                   const Corpus& negatives, unsigned threads) {
    if (negatives.empty()) throw ValidationError("negative corpus must be non-empty");
    const auto scores = standardized_scores(model, glossary, negatives, threads);
    return static_cast<double>(count_at_or_above(scores, model.bias)) /
           static_cast<double>(scores.size());
}

}  // namespace kbc
