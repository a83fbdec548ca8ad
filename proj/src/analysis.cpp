#include "gencrit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gencrit/errors.hpp"
#include "gencrit/rng.hpp"

namespace gencrit {

void TheoryInputs::validate() const {
    auto check01 = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw ConfigError(std::string(name) + " must be in [0, 1]");
    };
    check01(p, "theory.p");
    check01(p1, "theory.p1");
    check01(p2, "theory.p2");
    if (samples < 10'000) throw ConfigError("theory.samples must be >= 10000");
}

std::string to_string(DriftDirection direction) {
    switch (direction) {
        case DriftDirection::toward_wrong: return "toward_wrong";
        case DriftDirection::neutral: return "neutral";
        case DriftDirection::toward_correct: return "toward_correct";
    }
    throw ArgumentError("unknown drift direction");
}

namespace analysis {

ClosedFormReward closed_form_expected_reward(const TheoryInputs& inputs) {
    inputs.validate();
    const double p = inputs.p;
    const double p1 = inputs.p1;
    const double p2 = inputs.p2;
    ClosedFormReward out;
    out.direct = 0.7 * p * p1 + 0.7 * (1.0 - p) * p2;
    out.expected_validation = 0.7 * (p1 + p2) / 2.0;
    out.rearranged = 0.7 * (2.0 * p - 1.0) * p1 + 2.0 * (1.0 - p) * out.expected_validation;
    return out;
}

MonteCarloEstimate monte_carlo_expected_reward(const TheoryInputs& inputs,
                                               const PairRewardFn& reward_fn,
                                               std::uint64_t seed) {
    inputs.validate();
    if (!reward_fn) throw ArgumentError("monte_carlo_expected_reward needs a reward function");
    Rng rng = Rng::derive(seed, {stream::kAnalysis});
    double sum = 0.0;
    double sum_sq = 0.0;
    const long long n = inputs.samples;
    for (long long i = 0; i < n; ++i) {
        const bool response_correct = rng.bernoulli(inputs.p);
        const double p_judge_correct = response_correct ? inputs.p1 : 1.0 - inputs.p2;
        const bool judged_correct = rng.bernoulli(p_judge_correct);
        const double r = reward_fn(response_correct, judged_correct);
        sum += r;
        sum_sq += r * r;
    }
    MonteCarloEstimate out;
    out.estimate = sum / static_cast<double>(n);
    const double var = sum_sq / static_cast<double>(n) - out.estimate * out.estimate;
    out.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    return out;
}

DriftDirection drift_direction(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("drift_direction needs p in [0, 1]");
    const double sign = 2.0 * p - 1.0;
    if (sign < 0.0) return DriftDirection::toward_wrong;
    if (sign > 0.0) return DriftDirection::toward_correct;
    return DriftDirection::neutral;
}

PairRewardFn outcome_reward_fn(double critique_base) {
    return [critique_base](bool response_correct, bool judged_correct) {
        return judged_correct == response_correct ? critique_base : 0.0;
    };
}

PairRewardFn weighted_reward_fn(double p, double numerator) {
    if (!(p > 0.0 && p < 1.0))
        throw ArgumentError("weighted_reward_fn needs p strictly inside (0, 1)");
    return [p, numerator](bool response_correct, bool judged_correct) {
        if (judged_correct != response_correct) return 0.0;
        return response_correct ? numerator / p : numerator / (1.0 - p);
    };
}

std::vector<TheoryComparison> compare_to_theory(const std::vector<MetricsRow>& rows) {
    std::vector<TheoryComparison> out;
    out.reserve(rows.size());
    for (const MetricsRow& row : rows) {
        TheoryInputs inputs;
        inputs.p = row.ema_E_Rr;
        inputs.p1 = row.p1;
        inputs.p2 = row.p2;
        TheoryComparison cmp;
        cmp.step = row.step;
        cmp.p = inputs.p;
        cmp.predicted_R_c = closed_form_expected_reward(inputs).direct;
        cmp.observed_R_c = row.mean_R_c;
        cmp.p1_plus_p2 = row.p1 + row.p2;
        cmp.predicted_drift = drift_direction(inputs.p);
        out.push_back(cmp);
    }
    return out;
}

void write_theory_report(std::ostream& text_out, const std::vector<MetricsRow>& rows,
                         const std::vector<TheoryComparison>& comparisons) {
    if (rows.size() != comparisons.size())
        throw ArgumentError("rows and comparisons must align");
    text_out << "theory-vs-empirics report (" << rows.size() << " eval points)\n";
    if (rows.empty()) return;
    text_out << "run: mode=" << rows.front().mode << " data_mode=" << rows.front().data_mode
             << " reward=" << rows.front().reward_variant << " seed=" << rows.front().seed
             << "\n\n";
    text_out << "step  p=E[R_r]  pred_R_c  obs_R_c   P1+P2   drift\n";
    char line[160];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const TheoryComparison& c = comparisons[i];
        std::snprintf(line, sizeof(line), "%-5d %8.4f  %8.4f  %7.4f  %6.4f  %s", c.step, c.p,
                      c.predicted_R_c, c.observed_R_c, c.p1_plus_p2,
                      to_string(c.predicted_drift).c_str());
        text_out << line << '\n';
    }
    const TheoryComparison& first = comparisons.front();
    const TheoryComparison& last = comparisons.back();
    char moved[96];
    std::snprintf(moved, sizeof(moved), "%+.4f", last.p1_plus_p2 - first.p1_plus_p2);
    text_out << "\nP1+P2 moved " << moved
             << " over the run (constancy is a modeling assumption, not asserted)\n";
    text_out << "final predicted drift under unfiltered training: "
             << to_string(last.predicted_drift) << '\n';
}

void write_theory_csv(const std::string& path,
                      const std::vector<TheoryComparison>& comparisons) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open theory CSV for writing: " + path);
    out << "step,p,predicted_R_c,observed_R_c,p1_plus_p2,predicted_drift\n";
    for (const TheoryComparison& c : comparisons) {
        out << c.step << ',' << report::format_double(c.p) << ','
            << report::format_double(c.predicted_R_c) << ','
            << report::format_double(c.observed_R_c) << ','
            << report::format_double(c.p1_plus_p2) << ',' << to_string(c.predicted_drift)
            << '\n';
    }
    if (!out) throw DataError("failed writing theory CSV: " + path);
}

}  // namespace analysis

}  // namespace gencrit
