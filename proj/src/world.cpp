#include "gencrit/world.hpp"

#include <cmath>

#include "gencrit/errors.hpp"
#include "gencrit/policy.hpp"

namespace gencrit {

void WorldConfig::validate() const {
    if (num_questions < 1) throw ConfigError("world.num_questions must be >= 1");
    if (num_strategies < 1) throw ConfigError("world.num_strategies must be >= 1");
    if (feature_dim < 1) throw ConfigError("world.feature_dim must be >= 1");
    if (!(evidence_noise >= 0.0)) throw ConfigError("world.evidence_noise must be >= 0");
    if (!(success_mean >= 0.0 && success_mean <= 1.0))
        throw ConfigError("world.success_mean must be in [0, 1]");
    if (!(success_concentration > 0.0))
        throw ConfigError("world.success_concentration must be > 0");
    if (!(refinement_base >= 0.0 && refinement_base <= 1.0))
        throw ConfigError("world.refinement_base must be in [0, 1]");
    if (!(refinement_boost >= 0.0) || refinement_base + refinement_boost > 1.0 + 1e-12)
        throw ConfigError("world.refinement_boost must be >= 0 with base + boost <= 1");
}

World World::build(const WorldConfig& config) {
    config.validate();
    World world;
    world.config_ = config;
    world.questions_.resize(config.num_questions);

    const double mean = config.success_mean;
    const double conc = config.success_concentration;
    for (int q = 0; q < config.num_questions; ++q) {
        // one stream per question so the layout is stable under num_questions
        Rng rng = Rng::derive(config.seed, {stream::kWorld, static_cast<std::uint64_t>(q)});
        Question& question = world.questions_[q];
        question.id = q;
        question.features.resize(config.feature_dim);
        for (double& f : question.features) f = rng.normal();
        question.success_probs.resize(config.num_strategies);
        for (double& p : question.success_probs) {
            if (mean <= 0.0) {
                p = 0.0;
            } else if (mean >= 1.0) {
                p = 1.0;
            } else {
                p = rng.beta(mean * conc, (1.0 - mean) * conc);
            }
        }
    }
    return world;
}

World World::restore(const WorldConfig& config, std::vector<Question> questions) {
    config.validate();
    if (static_cast<int>(questions.size()) != config.num_questions)
        throw DataError("world restore: question count does not match config");
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const Question& q = questions[i];
        if (q.id != static_cast<int>(i))
            throw DataError("world restore: question ids must be 0..n-1 in order");
        if (static_cast<int>(q.features.size()) != config.feature_dim)
            throw DataError("world restore: feature_dim mismatch");
        if (static_cast<int>(q.success_probs.size()) != config.num_strategies)
            throw DataError("world restore: num_strategies mismatch");
        for (double p : q.success_probs)
            if (!(p >= 0.0 && p <= 1.0))
                throw DataError("world restore: success prob out of [0, 1]");
    }
    World world;
    world.config_ = config;
    world.questions_ = std::move(questions);
    return world;
}

const Question& World::question(int id) const {
    if (id < 0 || id >= num_questions())
        throw LookupError("unknown question id " + std::to_string(id));
    return questions_[id];
}

bool World::verify(const ResponseRecord& response) const {
    question(response.question_id);  // lookup check only
    return response.correct;
}

std::vector<double> World::observe_response(const Question& question,
                                            const ResponseRecord& response) const {
    if (response.strategy < 0 || response.strategy >= num_strategies())
        throw LookupError("response strategy out of range");
    std::vector<double> evidence;
    evidence.reserve(evidence_dim());
    evidence.insert(evidence.end(), question.features.begin(), question.features.end());
    for (int s = 0; s < num_strategies(); ++s)
        evidence.push_back(s == response.strategy ? 1.0 : 0.0);
    const double sign = response.correct ? 1.0 : -1.0;
    evidence.push_back(sign + config_.evidence_noise * response.noise);
    return evidence;
}

double World::refinement_success_prob(bool response_correct, bool judged_correct,
                                      bool diligent) const {
    double p = config_.refinement_base;
    if (diligent && judged_correct == response_correct) p += config_.refinement_boost;
    return std::min(p, 1.0);
}

RefinementOutcome World::refine(const ResponseRecord& response, const CritiqueRecord& critique,
                                int attempts, Rng& rng) const {
    if (attempts < 1) throw ArgumentError("refine: attempts must be >= 1");
    const double p =
        refinement_success_prob(response.correct, critique.judged_correct, critique.diligent);
    RefinementOutcome outcome;
    outcome.attempts = attempts;
    for (int i = 0; i < attempts; ++i)
        if (rng.bernoulli(p)) ++outcome.successes;
    return outcome;
}

double World::uniform_policy_success_mean() const {
    double sum = 0.0;
    for (const Question& q : questions_)
        for (double p : q.success_probs) sum += p;
    return sum / (static_cast<double>(questions_.size()) * num_strategies());
}

}  // namespace gencrit
