#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "gencrit/report.hpp"

namespace gencrit {

/// Inputs to the expected-critique-reward identity: p is the current
/// correct-rate E[R(r)], p1/p2 the critic's true-positive/true-negative
/// rates on the two pair classes.
struct TheoryInputs {
    double p = 0.5;
    double p1 = 0.5;
    double p2 = 0.5;
    long long samples = 1'000'000;

    void validate() const;
};

enum class DriftDirection { toward_wrong, neutral, toward_correct };

std::string to_string(DriftDirection direction);

struct ClosedFormReward {
    double direct = 0.0;              // 0.7 p p1 + 0.7 (1-p) p2
    double rearranged = 0.0;          // 0.7 (2p-1) p1 + 2 (1-p) E[R_val]
    double expected_validation = 0.0; // 0.7 (p1+p2)/2
};

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

namespace analysis {

/// Reward earned for one simulated pair: the pair's true label and the
/// critic's judgment of it.
using PairRewardFn = std::function<double(bool response_correct, bool judged_correct)>;

ClosedFormReward closed_form_expected_reward(const TheoryInputs& inputs);

MonteCarloEstimate monte_carlo_expected_reward(const TheoryInputs& inputs,
                                               const PairRewardFn& reward_fn,
                                               std::uint64_t seed);

DriftDirection drift_direction(double p);

/// Outcome critique reward at fixed base (default 0.7).
PairRewardFn outcome_reward_fn(double critique_base = 0.7);
/// Class-weighted critique reward with the running mean pinned to the true p.
PairRewardFn weighted_reward_fn(double p, double numerator = 0.35);

/// Theory-vs-empirics comparison for one metrics row, using ema_E_Rr as p
/// and the eval-set (p1, p2) as the critic rates.
struct TheoryComparison {
    int step = 0;
    double p = 0.0;
    double predicted_R_c = 0.0;
    double observed_R_c = 0.0;
    double p1_plus_p2 = 0.0;
    DriftDirection predicted_drift = DriftDirection::neutral;
};

std::vector<TheoryComparison> compare_to_theory(const std::vector<MetricsRow>& rows);

/// Text report plus a CSV of the comparison, for the analyze subcommand.
void write_theory_report(std::ostream& text_out, const std::vector<MetricsRow>& rows,
                         const std::vector<TheoryComparison>& comparisons);
void write_theory_csv(const std::string& path, const std::vector<TheoryComparison>& comparisons);

}  // namespace analysis

}  // namespace gencrit
