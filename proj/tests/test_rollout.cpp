#include <doctest.h>

#include <cstdint>
#include <set>
#include <vector>

#include "gencrit/errors.hpp"
#include "gencrit/rollout.hpp"

using namespace gencrit;

namespace {

World small_world(int num_questions = 8) {
    WorldConfig config;
    config.num_questions = num_questions;
    config.seed = 77;
    return World::build(config);
}

PolicyParams warm_params(std::uint64_t seed = 5) {
    Rng rng(seed);
    return PolicyParams::random_init(PolicyShape{}, 0.3, rng);
}

bool same_response(const ResponseRecord& a, const ResponseRecord& b) {
    return a.question_id == b.question_id && a.strategy == b.strategy &&
           a.correct == b.correct && a.noise == b.noise && a.uid == b.uid &&
           a.behavior_logprob == b.behavior_logprob && a.evidence == b.evidence;
}

CacheEntry entry_for(const World& world, const PolicyParams& params, int qid,
                     std::uint64_t uid) {
    Rng rng(uid * 31 + 7);
    CacheEntry entry;
    entry.question_id = qid;
    entry.response = policy::sample_response(params, world, world.question(qid), rng, uid);
    entry.correct = entry.response.correct;
    return entry;
}

}  // namespace

TEST_CASE("uids pack step slot and index into disjoint fields") {
    CHECK(rollout::response_uid(0, 0, 0) == 0);
    CHECK(rollout::response_uid(0, 0, 1) == 1);
    CHECK(rollout::response_uid(0, 1, 0) == (1ull << 16));
    CHECK(rollout::response_uid(1, 0, 0) == (1ull << 32));
    CHECK(rollout::response_uid(3, 2, 1) == (3ull << 32 | 2ull << 16 | 1ull));
    std::set<std::uint64_t> seen;
    for (int step = 0; step < 4; ++step)
        for (int slot = 0; slot < 4; ++slot)
            for (int index = 0; index < 4; ++index)
                seen.insert(rollout::response_uid(step, slot, index));
    CHECK(seen.size() == 64);
}

TEST_CASE("first order rollout fills every group and stamps uids") {
    const World world = small_world();
    const PolicyParams params = warm_params();
    const std::vector<int> batch{0, 3, 5};
    const auto groups = rollout::first_order(params, world, batch, 4, 9, 12);
    REQUIRE(groups.size() == 3);
    for (std::size_t slot = 0; slot < groups.size(); ++slot) {
        const ResponseGroup& group = groups[slot];
        CHECK(group.question_id == batch[slot]);
        REQUIRE(group.samples.size() == 4);
        for (int i = 0; i < 4; ++i) {
            const ResponseRecord& r = group.samples[static_cast<std::size_t>(i)];
            CHECK(r.question_id == batch[slot]);
            CHECK(r.uid == rollout::response_uid(12, static_cast<int>(slot), i));
            CHECK(r.strategy >= 0);
            CHECK(r.strategy < world.num_strategies());
            CHECK(static_cast<int>(r.evidence.size()) == world.evidence_dim());
            CHECK(r.correct == world.verify(r));
        }
    }
}

TEST_CASE("first order rollout replays exactly") {
    const World world = small_world();
    const PolicyParams params = warm_params();
    const std::vector<int> batch{1, 4, 4, 7};
    const auto a = rollout::first_order(params, world, batch, 5, 21, 3);
    const auto b = rollout::first_order(params, world, batch, 5, 21, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t g = 0; g < a.size(); ++g)
        for (std::size_t i = 0; i < a[g].samples.size(); ++i)
            CHECK(same_response(a[g].samples[i], b[g].samples[i]));
}

TEST_CASE("repeated questions in one batch draw from separate streams") {
    const World world = small_world();
    const PolicyParams params = warm_params();
    const auto groups = rollout::first_order(params, world, {2, 2}, 8, 13, 1);
    REQUIRE(groups.size() == 2);
    bool any_difference = false;
    for (std::size_t i = 0; i < 8; ++i) {
        if (groups[0].samples[i].strategy != groups[1].samples[i].strategy ||
            groups[0].samples[i].noise != groups[1].samples[i].noise)
            any_difference = true;
    }
    CHECK(any_difference);
}

TEST_CASE("seed and step both move the response stream") {
    const World world = small_world();
    const PolicyParams params = warm_params();
    const auto base = rollout::first_order(params, world, {0}, 6, 100, 5);
    const auto other_seed = rollout::first_order(params, world, {0}, 6, 101, 5);
    const auto other_step = rollout::first_order(params, world, {0}, 6, 100, 6);
    auto differs = [&](const std::vector<ResponseGroup>& other) {
        for (std::size_t i = 0; i < 6; ++i)
            if (base[0].samples[i].noise != other[0].samples[i].noise) return true;
        return false;
    };
    CHECK(differs(other_seed));
    CHECK(differs(other_step));
}

TEST_CASE("first order rollout rejects bad arguments") {
    const World world = small_world();
    const PolicyParams params = warm_params();
    CHECK_THROWS_AS(rollout::first_order(params, world, {0}, 0, 1, 1), ArgumentError);
    CHECK_THROWS_AS(rollout::first_order(params, world, {}, 4, 1, 1), ArgumentError);
    CHECK_THROWS_AS(rollout::first_order(params, world, {99}, 4, 1, 1), LookupError);
}

TEST_CASE("second order rollout critiques each cached pair n times") {
    const World world = small_world();
    const PolicyParams params = warm_params();
    const std::vector<CacheEntry> batch{entry_for(world, params, 0, 10),
                                        entry_for(world, params, 2, 11)};
    const auto groups = rollout::second_order(params, world, batch, 6, 41, 7);
    REQUIRE(groups.size() == 2);
    for (std::size_t g = 0; g < 2; ++g) {
        CHECK(groups[g].pair.question_id == batch[g].question_id);
        REQUIRE(groups[g].samples.size() == 6);
        for (const CritiqueRecord& c : groups[g].samples) {
            CHECK(c.question_id == batch[g].question_id);
            CHECK(c.response_uid == batch[g].response.uid);
            CHECK(c.behavior_logprob ==
                  doctest::Approx(policy::current_logprob(params, world, c, batch[g].response))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("second order rollout replays exactly and keys streams by response uid") {
    const World world = small_world();
    const PolicyParams params = warm_params();
    CacheEntry a = entry_for(world, params, 3, 20);
    const auto first = rollout::second_order(params, world, {a}, 16, 8, 2);
    const auto again = rollout::second_order(params, world, {a}, 16, 8, 2);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(first[0].samples[i].judged_correct == again[0].samples[i].judged_correct);
        CHECK(first[0].samples[i].diligent == again[0].samples[i].diligent);
        CHECK(first[0].samples[i].behavior_logprob == again[0].samples[i].behavior_logprob);
    }

    // Same question, different response identity: the stream must not collide.
    CacheEntry b = a;
    b.response.uid = 21;
    const auto other = rollout::second_order(params, world, {b}, 16, 8, 2);
    bool any_difference = false;
    for (std::size_t i = 0; i < 16; ++i) {
        if (first[0].samples[i].judged_correct != other[0].samples[i].judged_correct ||
            first[0].samples[i].diligent != other[0].samples[i].diligent)
            any_difference = true;
    }
    CHECK(any_difference);
}

TEST_CASE("second order rollout validates inputs") {
    const World world = small_world();
    const PolicyParams params = warm_params();
    CacheEntry entry = entry_for(world, params, 0, 30);
    CHECK_THROWS_AS(rollout::second_order(params, world, {entry}, 0, 1, 1), ArgumentError);
    entry.question_id = 99;
    CHECK_THROWS_AS(rollout::second_order(params, world, {entry}, 4, 1, 1), LookupError);
    CHECK(rollout::second_order(params, world, {}, 4, 1, 1).empty());
}

TEST_CASE("refinement delegates to the world with a per-critique stream") {
    WorldConfig config;
    config.num_questions = 4;
    config.refinement_base = 0.0;
    config.refinement_boost = 1.0;
    config.seed = 3;
    const World world = World::build(config);
    const PolicyParams params = warm_params();
    Rng rng(55);
    const ResponseRecord response =
        policy::sample_response(params, world, world.question(1), rng);

    CritiqueRecord matching;
    matching.question_id = 1;
    matching.judged_correct = response.correct;
    matching.diligent = true;
    const auto sure = rollout::refinement(world, response, matching, 5, 9, 2, 0);
    CHECK(sure.attempts == 5);
    CHECK(sure.successes == 5);

    CritiqueRecord sloppy = matching;
    sloppy.diligent = false;
    const auto never = rollout::refinement(world, response, sloppy, 5, 9, 2, 0);
    CHECK(never.successes == 0);
}

TEST_CASE("refinement replays and separates critique indices") {
    WorldConfig config;
    config.num_questions = 4;
    config.refinement_base = 0.5;
    config.refinement_boost = 0.3;
    config.seed = 3;
    const World world = World::build(config);
    const PolicyParams params = warm_params();
    Rng rng(56);
    const ResponseRecord response =
        policy::sample_response(params, world, world.question(0), rng);
    CritiqueRecord critique;
    critique.question_id = 0;
    critique.judged_correct = !response.correct;
    critique.diligent = false;

    const auto a = rollout::refinement(world, response, critique, 64, 17, 4, 0);
    const auto b = rollout::refinement(world, response, critique, 64, 17, 4, 0);
    CHECK(a.successes == b.successes);
    CHECK(a.attempts == 64);

    bool any_difference = false;
    for (int index = 1; index < 8 && !any_difference; ++index) {
        const auto c = rollout::refinement(world, response, critique, 64, 17, 4, index);
        if (c.successes != a.successes) any_difference = true;
    }
    CHECK(any_difference);
}
