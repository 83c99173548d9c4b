#include "kbc/eval_stats.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "kbc/error.hpp"
#include "kbc/model_io.hpp"

namespace kbc::stats {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b) / prefactor, modified Lentz.
double beta_continued_fraction(double x, double a, double b) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double dm = m;
        const double m2 = 2.0 * dm;
        double aa = dm * (b - dm) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;

        aa = -(a + dm) * (qab + dm) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double step = d * c;
        h *= step;
        if (std::abs(step - 1.0) < 1e-16) return h;
    }
    throw std::runtime_error("incomplete beta continued fraction did not converge");
}

double lower_tail(double x, double a, double b) {
    const double log_front = a * std::log(x) + b * std::log1p(-x) -
                             (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    require(x >= 0.0 && x <= 1.0, "incomplete beta requires 0 <= x <= 1");
    require(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b),
            "incomplete beta requires positive finite a and b");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - lower_tail(1.0 - x, b, a);
    return lower_tail(x, a, b);
}

double f_survival(double f, double d1, double d2) {
    require(d1 > 0.0 && d2 > 0.0, "F distribution degrees of freedom must be positive");
    require(!std::isnan(f), "F statistic is NaN");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    return regularized_incomplete_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0);
}

double mean(std::span<const double> values) {
    require(!values.empty(), "mean of an empty sample");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

AnovaResult one_way_anova(std::span<const std::vector<double>> groups) {
    require(groups.size() >= 2, "ANOVA needs at least two groups");
    std::size_t total = 0;
    double grand = 0.0;
    for (const auto& g : groups) {
        require(g.size() >= 2, "every ANOVA group needs at least two values");
        for (double v : g) {
            require(std::isfinite(v), "ANOVA values must be finite");
            grand += v;
        }
        total += g.size();
    }
    grand /= static_cast<double>(total);

    AnovaResult r;
    for (const auto& g : groups) {
        const double m = mean(g);
        r.ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
        for (double v : g) r.ss_within += (v - m) * (v - m);
    }
    r.df_between = groups.size() - 1;
    r.df_within = total - groups.size();
    require(r.ss_between > 0.0 || r.ss_within > 0.0, "ANOVA values are all identical");

    if (r.ss_within == 0.0) {
        r.f_stat = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
        r.zero_within_variance = true;
        return r;
    }
    const double d1 = static_cast<double>(r.df_between);
    const double d2 = static_cast<double>(r.df_within);
    r.f_stat = (r.ss_between / d1) / (r.ss_within / d2);
    r.p_value = f_survival(r.f_stat, d1, d2);
    return r;
}

std::optional<double> fractional_change(double recall_a, double recall_b) {
    if (recall_a == 0.0) return std::nullopt;
    return (recall_b - recall_a) / recall_a;
}

double two_sample_t(std::span<const double> a, std::span<const double> b) {
    require(a.size() >= 2 && b.size() >= 2, "t-test needs two values per sample");
    const double ma = mean(a), mb = mean(b);
    double ss = 0.0;
    for (double v : a) ss += (v - ma) * (v - ma);
    for (double v : b) ss += (v - mb) * (v - mb);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double pooled = ss / (na + nb - 2.0);
    return (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
}

std::optional<double> TableVerification::value(std::string_view quantity) const {
    for (const auto& [name, v] : computed)
        if (name == quantity) return v;
    return std::nullopt;
}

bool TableVerification::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

namespace {

std::optional<AnovaResult> try_anova(const std::vector<std::vector<double>>& groups,
                                     const std::string& label,
                                     std::vector<std::string>& warnings) {
    for (const auto& g : groups) {
        if (g.size() < 2) {
            warnings.push_back(label + ": ANOVA skipped, a group has fewer than two values");
            return std::nullopt;
        }
    }
    try {
        return one_way_anova(groups);
    } catch (const ContractError& e) {
        warnings.push_back(label + ": ANOVA skipped, " + e.what());
        return std::nullopt;
    }
}

}  // namespace

TableVerification verify_tables(std::string_view content) {
    struct Exp1Row { std::string category; double without, with; };
    struct Exp2Row { std::string category; double lr_a, lr_b, kb_a, kb_b; };
    std::vector<Exp1Row> exp1;
    std::vector<Exp2Row> exp2;
    std::vector<TableCheck> reported;

    auto check_recall = [](double v, const std::string& where) {
        if (v < 0.0 || v > 1.0) throw ValidationError(where + ": recall outside [0, 1]");
        return v;
    };
    for (const auto& r : parse_records(content)) {
        const auto where = "table line " + std::to_string(r.line_number);
        const auto words = split_words(r.value);
        if (r.key == "exp1") {
            if (words.size() != 3) throw ValidationError(where + ": exp1 needs category + 2 recalls");
            exp1.push_back({words[0], check_recall(parse_real(words[1], where), where),
                            check_recall(parse_real(words[2], where), where)});
        } else if (r.key == "exp2") {
            if (words.size() != 5) throw ValidationError(where + ": exp2 needs category + 4 recalls");
            exp2.push_back({words[0], check_recall(parse_real(words[1], where), where),
                            check_recall(parse_real(words[2], where), where),
                            check_recall(parse_real(words[3], where), where),
                            check_recall(parse_real(words[4], where), where)});
        } else if (r.key == "reported") {
            if (words.size() != 4 || (words[2] != "abs" && words[2] != "rel"))
                throw ValidationError(where + ": expected 'reported <quantity> <value> abs|rel <tol>'");
            TableCheck c;
            c.quantity = words[0];
            c.expected = parse_real(words[1], where);
            c.relative = words[2] == "rel";
            c.tolerance = parse_real(words[3], where);
            if (c.tolerance < 0.0) throw ValidationError(where + ": negative tolerance");
            reported.push_back(std::move(c));
        } else {
            throw ValidationError(where + ": unknown record '" + r.key + "'");
        }
    }
    if (exp1.empty() && exp2.empty()) throw ValidationError("table file contains no rows");

    TableVerification out;
    out.exp1_rows = exp1.size();
    out.exp2_rows = exp2.size();

    if (!exp1.empty()) {
        std::vector<std::vector<double>> groups(2);
        for (const auto& row : exp1) {
            groups[0].push_back(row.without);
            groups[1].push_back(row.with);
        }
        out.computed.emplace_back("exp1.mean_without", mean(groups[0]));
        out.computed.emplace_back("exp1.mean_with", mean(groups[1]));
        out.exp1_anova = try_anova(groups, "exp1", out.warnings);
        if (out.exp1_anova) {
            out.computed.emplace_back("exp1.f_stat", out.exp1_anova->f_stat);
            out.computed.emplace_back("exp1.p_value", out.exp1_anova->p_value);
        }
    }

    if (!exp2.empty()) {
        std::vector<std::vector<double>> groups(2);  // 0 = knowledge-based, 1 = logistic
        for (const auto& row : exp2) {
            if (auto c = fractional_change(row.kb_a, row.kb_b))
                groups[0].push_back(*c);
            else
                out.warnings.push_back("exp2 " + row.category +
                                       ": knowledge-based recall on A is 0, change excluded");
            if (auto c = fractional_change(row.lr_a, row.lr_b))
                groups[1].push_back(*c);
            else
                out.warnings.push_back("exp2 " + row.category +
                                       ": logistic recall on A is 0, change excluded");
        }
        if (!groups[0].empty()) out.computed.emplace_back("exp2.mean_change_kb", mean(groups[0]));
        if (!groups[1].empty()) out.computed.emplace_back("exp2.mean_change_lr", mean(groups[1]));
        out.exp2_anova = try_anova(groups, "exp2", out.warnings);
        if (out.exp2_anova) {
            out.computed.emplace_back("exp2.f_stat", out.exp2_anova->f_stat);
            out.computed.emplace_back("exp2.p_value", out.exp2_anova->p_value);
        }
    }

    for (auto& c : reported) {
        c.computed = out.value(c.quantity);
        if (c.computed) {
            const double limit = c.relative ? c.tolerance * std::abs(c.expected) : c.tolerance;
            c.passed = std::abs(*c.computed - c.expected) <= limit;
        }
        out.checks.push_back(std::move(c));
    }
    return out;
}

std::string format_table_verification(const TableVerification& result) {
    std::ostringstream out;
    out << "rows exp1=" << result.exp1_rows << " exp2=" << result.exp2_rows << '\n';
    for (const auto& [name, v] : result.computed) out << "computed " << name << ' ' << format_real(v) << '\n';
    for (const auto& c : result.checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.quantity << " expected=" << format_real(c.expected)
            << " computed=" << (c.computed ? format_real(*c.computed) : std::string("unavailable"))
            << " tolerance=" << (c.relative ? "rel:" : "abs:") << format_real(c.tolerance) << '\n';
    }
    for (const auto& w : result.warnings) out << "warning " << w << '\n';
    return std::move(out).str();
}

}  // namespace kbc::stats
