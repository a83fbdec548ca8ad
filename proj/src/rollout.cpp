#include "gencrit/rollout.hpp"

#include "gencrit/errors.hpp"
#include "gencrit/rng.hpp"

namespace gencrit {

void RolloutConfig::validate() const {
    if (n < 1) throw ConfigError("rollout.n must be >= 1");
    if (questions_per_step < 1) throw ConfigError("rollout.questions_per_step must be >= 1");
    if (mini_batch < 1) throw ConfigError("rollout.mini_batch must be >= 1");
    if (refinement_attempts < 1) throw ConfigError("rollout.refinement_attempts must be >= 1");
}

namespace rollout {

std::uint64_t response_uid(int step, int slot, int index) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(step)) << 32) |
           (static_cast<std::uint64_t>(static_cast<std::uint16_t>(slot)) << 16) |
           static_cast<std::uint64_t>(static_cast<std::uint16_t>(index));
}

std::vector<ResponseGroup> first_order(const PolicyParams& params, const World& world,
                                       const std::vector<int>& question_batch, int n,
                                       std::uint64_t seed, int step) {
    if (n < 1) throw ArgumentError("rollout group size must be >= 1");
    if (question_batch.empty()) throw ArgumentError("first_order: empty question batch");
    std::vector<ResponseGroup> groups;
    groups.reserve(question_batch.size());
    for (std::size_t slot = 0; slot < question_batch.size(); ++slot) {
        const int qid = question_batch[slot];
        const Question& question = world.question(qid);
        Rng rng = Rng::derive(seed, {stream::kResponse, static_cast<std::uint64_t>(step),
                                     static_cast<std::uint64_t>(slot),
                                     static_cast<std::uint64_t>(qid)});
        ResponseGroup group;
        group.question_id = qid;
        group.samples.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            group.samples.push_back(policy::sample_response(
                params, world, question, rng, response_uid(step, static_cast<int>(slot), i)));
        }
        groups.push_back(std::move(group));
    }
    return groups;
}

std::vector<CritiqueGroup> second_order(const PolicyParams& params, const World& world,
                                        const std::vector<CacheEntry>& pair_batch, int n,
                                        std::uint64_t seed, int step) {
    if (n < 1) throw ArgumentError("rollout group size must be >= 1");
    std::vector<CritiqueGroup> groups;
    groups.reserve(pair_batch.size());
    for (const CacheEntry& entry : pair_batch) {
        // Lookup also validates the pair still refers to a live question.
        world.question(entry.question_id);
        Rng rng = Rng::derive(seed, {stream::kCritique, static_cast<std::uint64_t>(step),
                                     static_cast<std::uint64_t>(entry.question_id),
                                     entry.response.uid});
        CritiqueGroup group;
        group.pair = entry;
        group.samples.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            group.samples.push_back(policy::sample_critique(params, entry.response, rng));
        }
        groups.push_back(std::move(group));
    }
    return groups;
}

RefinementOutcome refinement(const World& world, const ResponseRecord& response,
                             const CritiqueRecord& critique, int attempts, std::uint64_t seed,
                             int step, int critique_index) {
    Rng rng = Rng::derive(seed, {stream::kRefinement, static_cast<std::uint64_t>(step),
                                 static_cast<std::uint64_t>(response.question_id), response.uid,
                                 static_cast<std::uint64_t>(critique_index)});
    return world.refine(response, critique, attempts, rng);
}

}  // namespace rollout

}  // namespace gencrit
