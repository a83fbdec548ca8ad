#pragma once

#include <cstdint>
#include <vector>

#include "gencrit/rng.hpp"

namespace gencrit {

struct WorldConfig {
    int num_questions = 256;
    int num_strategies = 4;
    int feature_dim = 8;
    double evidence_noise = 0.75;   // std-dev of the correctness channel noise
    double success_mean = 0.25;     // population mean correctness under a uniform policy
    double success_concentration = 4.0;
    double refinement_base = 0.15;
    double refinement_boost = 0.55;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct Question {
    int id = 0;
    std::vector<double> features;
    std::vector<double> success_probs;  // per-strategy probability of a correct response
};

/// One sampled response: the chosen strategy, its ground-truth label, the
/// observable evidence vector, and the log-probability under the policy that
/// sampled it. `noise` is the raw standard-normal draw behind the evidence
/// correctness channel, kept so the evidence can be re-assembled exactly.
struct ResponseRecord {
    int question_id = 0;
    int strategy = 0;
    bool correct = false;
    std::vector<double> evidence;
    double behavior_logprob = 0.0;
    double noise = 0.0;
    std::uint64_t uid = 0;  // stable identity for stream derivation and logs
};

struct RefinementOutcome {
    int attempts = 0;
    int successes = 0;
};

/// Forward declaration; judgment/diligence live in policy.hpp.
struct CritiqueRecord;

/// The synthetic task universe. Immutable after construction; safe to share
/// across rollout workers.
class World {
  public:
    static World build(const WorldConfig& config);
    /// Rebuild from stored data (snapshots); question arrays must match the
    /// config's dimensions.
    static World restore(const WorldConfig& config, std::vector<Question> questions);

    const WorldConfig& config() const { return config_; }
    int num_questions() const { return static_cast<int>(questions_.size()); }
    int num_strategies() const { return config_.num_strategies; }
    int feature_dim() const { return config_.feature_dim; }
    /// Evidence layout: [features | one-hot strategy | correctness channel].
    int evidence_dim() const { return config_.feature_dim + config_.num_strategies + 1; }

    const Question& question(int id) const;
    const std::vector<Question>& questions() const { return questions_; }

    /// Ground-truth check of a response; returns the label stored at sampling
    /// time, never recomputed.
    bool verify(const ResponseRecord& response) const;

    /// Assemble the evidence vector for a response from its stored noise draw.
    std::vector<double> observe_response(const Question& question,
                                         const ResponseRecord& response) const;

    /// Per-attempt refinement success probability for a critique of the given
    /// quality: base rate, plus the boost when the critique was diligent and
    /// its judgment matches the response's true label.
    double refinement_success_prob(bool response_correct, bool judged_correct,
                                   bool diligent) const;

    RefinementOutcome refine(const ResponseRecord& response, const CritiqueRecord& critique,
                             int attempts, Rng& rng) const;

    /// Mean of question.success_probs over all (question, strategy) cells,
    /// i.e. expected correctness of a uniform policy.
    double uniform_policy_success_mean() const;

  private:
    WorldConfig config_;
    std::vector<Question> questions_;
};

}  // namespace gencrit
