#include "gencrit/policy.hpp"

#include <algorithm>
#include <cmath>

#include "gencrit/errors.hpp"

namespace gencrit {
namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double dot_head(std::span<const double> head, std::span<const double> input) {
    // head = [weights..., bias]
    double acc = head[input.size()];
    for (std::size_t i = 0; i < input.size(); ++i) acc += head[i] * input[i];
    return acc;
}

struct CritiqueLogits {
    std::vector<double> input;  // embedded evidence, unmasked
    double diligence = 0.0;
    double judge_unmasked = 0.0;
    double judge_masked = 0.0;  // correctness channel zeroed
};

CritiqueLogits critique_logits(const PolicyParams& params, std::span<const double> evidence) {
    CritiqueLogits out;
    out.input = policy::critique_input(params, evidence);
    const auto judge = params.judge_head();
    const auto dil = params.diligence_head();
    out.diligence = dot_head(dil, out.input);
    out.judge_unmasked = dot_head(judge, out.input);
    // masking only removes the last channel's contribution
    const std::size_t z = out.input.size() - 1;
    out.judge_masked = out.judge_unmasked - judge[z] * out.input[z];
    return out;
}

}  // namespace

PolicyParams PolicyParams::random_init(const PolicyShape& shape, double scale, Rng& rng) {
    PolicyParams params(shape);
    for (double& v : params.data_) v = scale * rng.normal();
    return params;
}

bool PolicyParams::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

namespace policy {

void check_shape(const PolicyParams& params, const World& world) {
    const PolicyShape& s = params.shape();
    if (s.feature_dim != world.feature_dim() || s.num_strategies != world.num_strategies())
        throw ConfigError("policy shape does not match world: feature_dim/num_strategies");
}

std::vector<double> embed_features(const PolicyParams& params, std::span<const double> features) {
    const PolicyShape& s = params.shape();
    if (static_cast<int>(features.size()) != s.feature_dim)
        throw ConfigError("policy.feature_dim mismatch with input features");
    std::vector<double> e(s.embed_dim, 0.0);
    for (int f = 0; f < s.feature_dim; ++f) {
        const double x = features[f];
        for (int k = 0; k < s.embed_dim; ++k) e[k] += params.embed(f, k) * x;
    }
    return e;
}

std::vector<double> generation_distribution(const PolicyParams& params,
                                            const Question& question) {
    const PolicyShape& s = params.shape();
    const std::vector<double> e = embed_features(params, question.features);
    std::vector<double> logits(s.num_strategies, 0.0);
    for (int k = 0; k < s.embed_dim; ++k) {
        const double ek = e[k];
        for (int a = 0; a < s.num_strategies; ++a) logits[a] += params.gen(k, a) * ek;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double& l : logits) {
        l = std::exp(l - top);
        total += l;
    }
    for (double& l : logits) l /= total;
    return logits;
}

double logprob_response(const PolicyParams& params, const Question& question, int strategy) {
    const std::vector<double> probs = generation_distribution(params, question);
    if (strategy < 0 || strategy >= static_cast<int>(probs.size()))
        throw LookupError("strategy out of range");
    return std::log(probs[strategy]);
}

std::vector<double> critique_input(const PolicyParams& params, std::span<const double> evidence) {
    const PolicyShape& s = params.shape();
    if (static_cast<int>(evidence.size()) != s.evidence_dim())
        throw ConfigError("policy evidence_dim mismatch");
    std::vector<double> input = embed_features(params, evidence.first(s.feature_dim));
    input.insert(input.end(), evidence.begin() + s.feature_dim, evidence.end());
    return input;
}

CritiqueProbs critique_distribution(const PolicyParams& params,
                                    std::span<const double> evidence) {
    const CritiqueLogits logits = critique_logits(params, evidence);
    CritiqueProbs probs;
    probs.p_diligent = sigmoid(logits.diligence);
    probs.p_correct_given_diligent = sigmoid(logits.judge_unmasked);
    probs.p_correct_given_sloppy = sigmoid(logits.judge_masked);
    return probs;
}

double logprob_critique(const PolicyParams& params, std::span<const double> evidence,
                        bool judged_correct, bool diligent) {
    const CritiqueLogits logits = critique_logits(params, evidence);
    const double lp_d =
        diligent ? log_sigmoid(logits.diligence) : log_sigmoid(-logits.diligence);
    const double judge = diligent ? logits.judge_unmasked : logits.judge_masked;
    const double lp_j = judged_correct ? log_sigmoid(judge) : log_sigmoid(-judge);
    return lp_d + lp_j;
}

ResponseRecord sample_response(const PolicyParams& params, const World& world,
                               const Question& question, Rng& rng, std::uint64_t uid) {
    const std::vector<double> probs = generation_distribution(params, question);
    const int strategy = static_cast<int>(rng.categorical(probs));
    ResponseRecord response;
    response.question_id = question.id;
    response.strategy = strategy;
    response.correct = rng.bernoulli(question.success_probs[strategy]);
    response.noise = rng.normal();
    response.behavior_logprob = std::log(probs[strategy]);
    response.uid = uid;
    response.evidence = world.observe_response(question, response);
    return response;
}

CritiqueRecord sample_critique(const PolicyParams& params, const ResponseRecord& response,
                               Rng& rng) {
    const CritiqueLogits logits = critique_logits(params, response.evidence);
    CritiqueRecord critique;
    critique.question_id = response.question_id;
    critique.response_uid = response.uid;
    critique.diligent = rng.bernoulli(sigmoid(logits.diligence));
    const double judge = critique.diligent ? logits.judge_unmasked : logits.judge_masked;
    critique.judged_correct = rng.bernoulli(sigmoid(judge));
    const double lp_d = critique.diligent ? log_sigmoid(logits.diligence)
                                          : log_sigmoid(-logits.diligence);
    const double lp_j =
        critique.judged_correct ? log_sigmoid(judge) : log_sigmoid(-judge);
    critique.behavior_logprob = lp_d + lp_j;
    return critique;
}

double current_logprob(const PolicyParams& params, const World& world,
                       const ResponseRecord& response) {
    return logprob_response(params, world.question(response.question_id), response.strategy);
}

double current_logprob(const PolicyParams& params, const World& world,
                       const CritiqueRecord& critique, const ResponseRecord& response) {
    (void)world;
    return logprob_critique(params, response.evidence, critique.judged_correct,
                            critique.diligent);
}

void add_scaled_grad_response(const PolicyParams& params, const Question& question, int strategy,
                              double coef, std::span<double> grad) {
    const PolicyShape& s = params.shape();
    const std::vector<double> e = embed_features(params, question.features);
    const std::vector<double> probs = generation_distribution(params, question);

    // d logprob / d logits = onehot(strategy) - probs
    std::vector<double> dlogits(s.num_strategies);
    for (int a = 0; a < s.num_strategies; ++a)
        dlogits[a] = (a == strategy ? 1.0 : 0.0) - probs[a];

    // generation head: logits[a] = sum_k gen(k,a) * e[k]
    double* ggen = grad.data() + params.gen_offset();
    for (int k = 0; k < s.embed_dim; ++k) {
        const double ek = coef * e[k];
        for (int a = 0; a < s.num_strategies; ++a)
            ggen[k * s.num_strategies + a] += ek * dlogits[a];
    }

    // back through the embedding: de[k] = sum_a gen(k,a) * dlogits[a]
    std::vector<double> de(s.embed_dim, 0.0);
    for (int k = 0; k < s.embed_dim; ++k) {
        double acc = 0.0;
        for (int a = 0; a < s.num_strategies; ++a) acc += params.gen(k, a) * dlogits[a];
        de[k] = acc;
    }
    double* gembed = grad.data() + params.embed_offset();
    for (int f = 0; f < s.feature_dim; ++f) {
        const double x = coef * question.features[f];
        for (int k = 0; k < s.embed_dim; ++k) gembed[f * s.embed_dim + k] += x * de[k];
    }
}

void add_scaled_grad_critique(const PolicyParams& params, std::span<const double> evidence,
                              bool judged_correct, bool diligent, double coef,
                              std::span<double> grad) {
    const PolicyShape& s = params.shape();
    const CritiqueLogits logits = critique_logits(params, evidence);
    const int dim = s.critique_input_dim();
    const int zc = dim - 1;  // correctness channel index in the head input

    const double d = diligent ? 1.0 : 0.0;
    const double dl_dil = d - sigmoid(logits.diligence);
    const double judge = diligent ? logits.judge_unmasked : logits.judge_masked;
    const double j = judged_correct ? 1.0 : 0.0;
    const double dl_judge = j - sigmoid(judge);

    const auto judge_w = params.judge_head();
    const auto dil_w = params.diligence_head();

    double* gjudge = grad.data() + params.judge_offset();
    double* gdil = grad.data() + params.diligence_offset();
    std::vector<double> dinput(dim, 0.0);

    for (int i = 0; i < dim; ++i) {
        const double u = logits.input[i];
        gdil[i] += coef * dl_dil * u;
        dinput[i] += dl_dil * dil_w[i];
        const bool masked_out = (!diligent && i == zc);
        if (!masked_out) {
            gjudge[i] += coef * dl_judge * u;
            dinput[i] += dl_judge * judge_w[i];
        }
    }
    gjudge[dim] += coef * dl_judge;  // bias
    gdil[dim] += coef * dl_dil;

    // back through the shared embedding over the feature block
    double* gembed = grad.data() + params.embed_offset();
    for (int f = 0; f < s.feature_dim; ++f) {
        const double x = coef * evidence[f];
        for (int k = 0; k < s.embed_dim; ++k) gembed[f * s.embed_dim + k] += x * dinput[k];
    }
}

PolicyParams apply_update(const PolicyParams& params, std::span<const double> grad,
                          double learning_rate) {
    if (grad.size() != params.size()) throw ConfigError("apply_update: gradient size mismatch");
    for (double g : grad)
        if (!std::isfinite(g))
            throw NumericError("apply_update: non-finite gradient, step aborted");
    PolicyParams next = params;
    auto out = next.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += learning_rate * grad[i];
    return next;
}

}  // namespace policy
}  // namespace gencrit
