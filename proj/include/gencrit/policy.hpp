#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gencrit/rng.hpp"
#include "gencrit/world.hpp"

namespace gencrit {

/// One sampled critique of a <question, response> pair: the binary judgment,
/// whether the critique was produced diligently, and the joint action
/// log-probability under the sampling policy.
struct CritiqueRecord {
    int question_id = 0;
    std::uint64_t response_uid = 0;
    bool judged_correct = false;
    bool diligent = false;
    double behavior_logprob = 0.0;
};

struct PolicyShape {
    int feature_dim = 8;
    int embed_dim = 8;
    int num_strategies = 4;

    int evidence_dim() const { return feature_dim + num_strategies + 1; }
    /// Input dimension of the judgment/diligence heads:
    /// [embedded features | one-hot strategy | correctness channel].
    int critique_input_dim() const { return embed_dim + num_strategies + 1; }
    int num_params() const {
        return feature_dim * embed_dim + embed_dim * num_strategies +
               2 * (critique_input_dim() + 1);
    }
    bool operator==(const PolicyShape&) const = default;
};

/// Flat parameter vector with typed views into the shared embedding, the
/// generation head, and the two critique heads. Keeping the storage flat makes
/// gradient accumulation, finite-difference checks, and snapshots trivial.
class PolicyParams {
  public:
    PolicyParams() = default;
    explicit PolicyParams(const PolicyShape& shape)
        : shape_(shape), data_(static_cast<std::size_t>(shape.num_params()), 0.0) {}

    static PolicyParams zeros(const PolicyShape& shape) { return PolicyParams(shape); }
    static PolicyParams random_init(const PolicyShape& shape, double scale, Rng& rng);

    const PolicyShape& shape() const { return shape_; }
    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::size_t size() const { return data_.size(); }

    // offsets into the flat vector
    int embed_offset() const { return 0; }
    int gen_offset() const { return shape_.feature_dim * shape_.embed_dim; }
    int judge_offset() const { return gen_offset() + shape_.embed_dim * shape_.num_strategies; }
    int diligence_offset() const { return judge_offset() + shape_.critique_input_dim() + 1; }

    double embed(int f, int e) const { return data_[f * shape_.embed_dim + e]; }
    double& embed(int f, int e) { return data_[f * shape_.embed_dim + e]; }
    double gen(int e, int s) const { return data_[gen_offset() + e * shape_.num_strategies + s]; }
    double& gen(int e, int s) { return data_[gen_offset() + e * shape_.num_strategies + s]; }
    std::span<const double> judge_head() const {  // weights then bias
        return std::span<const double>(data_).subspan(judge_offset(),
                                                      shape_.critique_input_dim() + 1);
    }
    std::span<double> judge_head() {
        return std::span<double>(data_).subspan(judge_offset(), shape_.critique_input_dim() + 1);
    }
    std::span<const double> diligence_head() const {
        return std::span<const double>(data_).subspan(diligence_offset(),
                                                      shape_.critique_input_dim() + 1);
    }
    std::span<double> diligence_head() {
        return std::span<double>(data_).subspan(diligence_offset(),
                                                shape_.critique_input_dim() + 1);
    }

    bool all_finite() const;

  private:
    PolicyShape shape_;
    std::vector<double> data_;
};

/// Conditional critique probabilities for one evidence vector. A diligent
/// critique's judgment reads the correctness channel; a sloppy one sees it
/// masked to zero, so its judgment degrades toward a prior guess.
struct CritiqueProbs {
    double p_diligent = 0.5;
    double p_correct_given_diligent = 0.5;
    double p_correct_given_sloppy = 0.5;

    double joint(bool judged_correct, bool diligent) const {
        const double pd = diligent ? p_diligent : 1.0 - p_diligent;
        const double pc = diligent ? p_correct_given_diligent : p_correct_given_sloppy;
        return pd * (judged_correct ? pc : 1.0 - pc);
    }
    /// P(judgment = correct), diligence marginalized out.
    double marginal_correct() const {
        return p_diligent * p_correct_given_diligent +
               (1.0 - p_diligent) * p_correct_given_sloppy;
    }
};

namespace policy {

void check_shape(const PolicyParams& params, const World& world);

/// Shared-trunk embedding of a feature vector.
std::vector<double> embed_features(const PolicyParams& params, std::span<const double> features);

/// Softmax over strategies for a question; sums to 1 within 1e-12.
std::vector<double> generation_distribution(const PolicyParams& params,
                                            const Question& question);

double logprob_response(const PolicyParams& params, const Question& question, int strategy);

/// Head input for the critique path: the feature block of the evidence is
/// passed through the shared embedding, strategy one-hot and correctness
/// channel are passed through unchanged.
std::vector<double> critique_input(const PolicyParams& params, std::span<const double> evidence);

CritiqueProbs critique_distribution(const PolicyParams& params, std::span<const double> evidence);

double logprob_critique(const PolicyParams& params, std::span<const double> evidence,
                        bool judged_correct, bool diligent);

ResponseRecord sample_response(const PolicyParams& params, const World& world,
                               const Question& question, Rng& rng, std::uint64_t uid = 0);

CritiqueRecord sample_critique(const PolicyParams& params, const ResponseRecord& response,
                               Rng& rng);

/// Log-probability of a recorded action under the current parameters.
double current_logprob(const PolicyParams& params, const World& world,
                       const ResponseRecord& response);
double current_logprob(const PolicyParams& params, const World& world,
                       const CritiqueRecord& critique, const ResponseRecord& response);

/// Accumulate coef * d(logprob)/d(params) into grad. grad must have
/// params.size() entries.
void add_scaled_grad_response(const PolicyParams& params, const Question& question, int strategy,
                              double coef, std::span<double> grad);
void add_scaled_grad_critique(const PolicyParams& params, std::span<const double> evidence,
                              bool judged_correct, bool diligent, double coef,
                              std::span<double> grad);

/// Plain ascent step: returns params + lr * grad, inputs untouched.
/// Throws NumericError if the gradient is not finite.
PolicyParams apply_update(const PolicyParams& params, std::span<const double> grad,
                          double learning_rate);

}  // namespace policy

}  // namespace gencrit
