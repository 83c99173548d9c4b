#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kbc::stats {

// I_x(a, b) by Lentz's continued fraction, evaluated on whichever of
// (x; a, b) and (1 - x; b, a) converges faster.
double regularized_incomplete_beta(double x, double a, double b);

// P(F >= f) for an F(d1, d2) variable.
double f_survival(double f, double d1, double d2);

struct AnovaResult {
    double f_stat = 0.0;
    std::size_t df_between = 0;
    std::size_t df_within = 0;
    double p_value = 1.0;
    double ss_between = 0.0;
    double ss_within = 0.0;
    bool zero_within_variance = false;  // f_stat is +inf and p_value 0
};

// Requires >= 2 groups of >= 2 values each, not all values identical.
AnovaResult one_way_anova(std::span<const std::vector<double>> groups);

// (b - a) / a; nullopt when a == 0.
std::optional<double> fractional_change(double recall_a, double recall_b);

double mean(std::span<const double> values);

// Pooled-variance two-sample t statistic.
double two_sample_t(std::span<const double> a, std::span<const double> b);

// Aggregate checks over published per-category recall tables.
//
// Input records (one per line, '#' comments allowed):
//   exp1 <category> <recall_without_entropy> <recall_with_entropy>
//   exp2 <category> <lr_recall_a> <lr_recall_b> <kb_recall_a> <kb_recall_b>
//   reported <quantity> <value> abs|rel <tolerance>
// Quantities: exp1.mean_without, exp1.mean_with, exp1.p_value,
// exp2.mean_change_kb, exp2.mean_change_lr, exp2.p_value.
struct TableCheck {
    std::string quantity;
    double expected = 0.0;
    std::optional<double> computed;
    bool relative = false;
    double tolerance = 0.0;
    bool passed = false;
};

struct TableVerification {
    std::size_t exp1_rows = 0;
    std::size_t exp2_rows = 0;
    std::vector<std::pair<std::string, double>> computed;  // in emission order
    std::optional<AnovaResult> exp1_anova;
    std::optional<AnovaResult> exp2_anova;
    std::vector<TableCheck> checks;
    std::vector<std::string> warnings;

    std::optional<double> value(std::string_view quantity) const;
    bool all_passed() const;
};

TableVerification verify_tables(std::string_view content);
std::string format_table_verification(const TableVerification& result);

}  // namespace kbc::stats
