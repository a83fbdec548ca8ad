#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gencrit/cache.hpp"
#include "gencrit/policy.hpp"
#include "gencrit/world.hpp"

namespace gencrit {

struct RolloutConfig {
    int n = 5;                    // samples per prompt
    int questions_per_step = 512;
    int mini_batch = 128;
    int refinement_attempts = 1;

    void validate() const;
};

/// Group of same-question responses; the unit of advantage normalization.
struct ResponseGroup {
    int question_id = 0;
    std::vector<ResponseRecord> samples;
    std::vector<double> rewards;
};

/// Group of critiques of one <question, response> pair.
struct CritiqueGroup {
    CacheEntry pair;
    std::vector<CritiqueRecord> samples;
    std::vector<double> rewards;
    std::vector<RefinementOutcome> refinements;  // filled only for denoised variants
};

namespace rollout {

/// Stable identity for a response sampled at (step, batch slot, index); used
/// to derive the critique streams that judge it later.
std::uint64_t response_uid(int step, int slot, int index);

/// Sample n responses for each question in the batch. Each group draws from a
/// stream derived from (seed, step, batch slot, question id), so execution
/// order cannot change the result and batches that repeat a question (batch
/// larger than the world) still get independent groups.
std::vector<ResponseGroup> first_order(const PolicyParams& params, const World& world,
                                       const std::vector<int>& question_batch, int n,
                                       std::uint64_t seed, int step);

/// Sample n critiques for each cached <question, response> pair.
std::vector<CritiqueGroup> second_order(const PolicyParams& params, const World& world,
                                        const std::vector<CacheEntry>& pair_batch, int n,
                                        std::uint64_t seed, int step);

/// Refinement draws for one critique; delegates to the world model.
RefinementOutcome refinement(const World& world, const ResponseRecord& response,
                             const CritiqueRecord& critique, int attempts, std::uint64_t seed,
                             int step, int critique_index);

}  // namespace rollout

}  // namespace gencrit
