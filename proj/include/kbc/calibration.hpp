#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kbc/background.hpp"
#include "kbc/glossary.hpp"
#include "kbc/text.hpp"

namespace kbc {

inline constexpr double kDefaultTargetFpr = 0.0005;

struct CalibrationResult {
    double bias = 0.0;
    double achieved_fpr = 0.0;
    double target_fpr = 0.0;
    std::size_t n_negatives = 0;
};

// Smallest step used to place a threshold strictly above a score value.
double threshold_step(double value);

std::size_t count_at_or_above(std::span<const double> scores, double threshold);

// Chooses the lowest threshold t, among observed scores and score + step,
// for which count(score >= t) / n <= target_fpr. Pure and deterministic.
CalibrationResult select_threshold(std::span<const double> negative_scores, double target_fpr);

BackgroundModel set_bias_direct(BackgroundModel model, double bias);

std::vector<double> standardized_scores(const BackgroundModel& model, const Glossary& glossary,
                                        const Corpus& corpus, unsigned threads = 0);

// Does not modify the model; apply result.bias with set_bias_direct.
CalibrationResult calibrate_fpr(const BackgroundModel& model, const Glossary& glossary,
                                const Corpus& negatives, double target_fpr,
                                unsigned threads = 0);

double measure_fpr(const BackgroundModel& model, const Glossary& glossary,
                   const Corpus& negatives, unsigned threads = 0);

}  // namespace kbc
