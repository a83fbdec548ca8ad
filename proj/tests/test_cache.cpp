#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "gencrit/cache.hpp"
#include "gencrit/errors.hpp"

using namespace gencrit;

namespace {

ResponseRecord response(int qid, bool correct, std::uint64_t uid) {
    ResponseRecord r;
    r.question_id = qid;
    r.correct = correct;
    r.uid = uid;
    r.behavior_logprob = -1.0;
    return r;
}

std::vector<ResponseRecord> group(int qid, std::initializer_list<bool> labels) {
    std::vector<ResponseRecord> g;
    std::uint64_t uid = 1;
    for (bool correct : labels) g.push_back(response(qid, correct, uid++));
    return g;
}

std::pair<ResponseRecord, ResponseRecord> pair_for(int qid, std::uint64_t uid) {
    return {response(qid, true, uid), response(qid, false, uid + 1)};
}

}  // namespace

TEST_CASE("all-equal groups produce no pair") {
    Rng rng(1);
    CHECK_FALSE(filter_group(group(0, {true, true, true}), rng).has_value());
    CHECK_FALSE(filter_group(group(0, {false, false, false}), rng).has_value());
    CHECK_THROWS_AS(filter_group({}, rng), ArgumentError);
}

TEST_CASE("mixed groups yield one correct and one wrong response") {
    Rng rng(2);
    const auto pair = filter_group(group(3, {true, false, false, true, false}), rng);
    REQUIRE(pair.has_value());
    CHECK(pair->first.correct);
    CHECK_FALSE(pair->second.correct);
    CHECK(pair->first.question_id == 3);
}

TEST_CASE("filter choice is uniform over the minority class complement") {
    // Group with two correct (uids 1, 4) and three wrong; both correct uids
    // should appear over many draws.
    std::set<std::uint64_t> chosen;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        const auto pair = filter_group(group(0, {true, false, false, true, false}), rng);
        REQUIRE(pair.has_value());
        chosen.insert(pair->first.uid);
    }
    CHECK(chosen.size() == 2);
}

TEST_CASE("filtered cache stays exactly balanced through pushes and samples") {
    QuestionResponseCache cache(64, CacheMode::filtered);
    Rng rng(3);
    std::uint64_t uid = 1;
    for (int step = 1; step <= 40; ++step) {
        std::vector<std::pair<ResponseRecord, ResponseRecord>> pairs;
        for (int k = 0; k < 3; ++k) {
            pairs.push_back(pair_for(step % 8, uid));
            uid += 2;
        }
        cache.push_pairs(pairs, step);
        CHECK(cache.balanced());
        CHECK(cache.size() <= 64);
        const auto sampled = cache.sample(4, rng);
        CHECK(cache.balanced());
        CHECK(sampled.entries.size() <= 4);
    }
}

TEST_CASE("filtered sampling draws class-balanced batches") {
    QuestionResponseCache cache(128, CacheMode::filtered);
    std::uint64_t uid = 1;
    std::vector<std::pair<ResponseRecord, ResponseRecord>> pairs;
    for (int k = 0; k < 20; ++k) {
        pairs.push_back(pair_for(k, uid));
        uid += 2;
    }
    cache.push_pairs(pairs, 1);
    Rng rng(4);
    const auto sampled = cache.sample(10, rng);
    REQUIRE(sampled.entries.size() == 10);
    const auto correct = std::count_if(sampled.entries.begin(), sampled.entries.end(),
                                       [](const CacheEntry& e) { return e.correct; });
    CHECK(correct == 5);
}

TEST_CASE("an odd request is rounded down to stay balanced") {
    QuestionResponseCache cache(128, CacheMode::filtered);
    cache.push_pairs({pair_for(0, 1), pair_for(1, 3)}, 1);
    Rng rng(5);
    const auto sampled = cache.sample(3, rng);
    CHECK(sampled.entries.size() == 2);
}

TEST_CASE("consuming samples removes entries, non-consuming retains them") {
    QuestionResponseCache consuming(64, CacheMode::filtered);
    consuming.push_pairs({pair_for(0, 1), pair_for(1, 3)}, 1);
    Rng rng(6);
    consuming.sample(2, rng);
    CHECK(consuming.size() == 2);

    QuestionResponseCache retaining(64, CacheMode::filtered);
    retaining.set_consume_on_sample(false);
    retaining.push_pairs({pair_for(0, 1), pair_for(1, 3)}, 1);
    retaining.sample(2, rng);
    CHECK(retaining.size() == 4);
}

TEST_CASE("starvation is flagged when the draw comes up short") {
    QuestionResponseCache cache(64, CacheMode::filtered);
    Rng rng(7);
    auto sampled = cache.sample(4, rng);
    CHECK(sampled.starved);
    CHECK(sampled.entries.empty());
    cache.push_pairs({pair_for(0, 1)}, 1);
    sampled = cache.sample(8, rng);
    CHECK(sampled.starved);
    CHECK(sampled.entries.size() == 2);
}

TEST_CASE("filtered eviction removes whole pairs first-in first-out") {
    QuestionResponseCache cache(4, CacheMode::filtered);
    cache.push_pairs({pair_for(0, 1), pair_for(1, 3), pair_for(2, 5)}, 1);
    CHECK(cache.size() == 4);
    CHECK(cache.balanced());
    std::set<int> qids;
    for (const CacheEntry& e : cache.entries()) qids.insert(e.question_id);
    CHECK(qids == std::set<int>{1, 2});
}

TEST_CASE("raw pushes are rejected in filtered mode and vice versa") {
    QuestionResponseCache filtered(16, CacheMode::filtered);
    CHECK_THROWS_AS(filtered.push_raw({response(0, true, 1)}, 1), ModeError);
    QuestionResponseCache raw(16, CacheMode::random_sampling);
    CHECK_THROWS_AS(raw.push_pairs({pair_for(0, 1)}, 1), ModeError);
}

TEST_CASE("pair pushes must be one correct and one wrong") {
    QuestionResponseCache cache(16, CacheMode::filtered);
    CHECK_THROWS_AS(
        cache.push_pairs({{response(0, true, 1), response(0, true, 2)}}, 1), ArgumentError);
}

TEST_CASE("random sampling mode keeps labels as they come and evicts fifo") {
    QuestionResponseCache cache(3, CacheMode::random_sampling);
    cache.push_raw({response(0, false, 1), response(1, false, 2), response(2, true, 3),
                    response(3, false, 4)},
                   1);
    CHECK(cache.size() == 3);
    CHECK(cache.entries().front().question_id == 1);
    Rng rng(8);
    const auto sampled = cache.sample(2, rng);
    CHECK(sampled.entries.size() == 2);
    CHECK(cache.size() == 1);
}

TEST_CASE("static mode never consumes") {
    QuestionResponseCache cache(8, CacheMode::random_sampling);
    cache.push_raw({response(0, true, 1), response(1, false, 2)}, 1);
    cache.freeze();
    Rng rng(9);
    for (int i = 0; i < 5; ++i) {
        const auto sampled = cache.sample(2, rng);
        CHECK(sampled.entries.size() == 2);
        CHECK_FALSE(sampled.starved);
    }
    CHECK(cache.size() == 2);
}

TEST_CASE("restore rebuilds counts and enforces balance for filtered mode") {
    std::vector<CacheEntry> entries;
    CacheEntry e;
    e.question_id = 0;
    e.response = response(0, true, 1);
    e.correct = true;
    entries.push_back(e);
    CHECK_THROWS_AS(
        QuestionResponseCache::restore(8, CacheMode::filtered, true, entries), DataError);
    e.correct = false;
    e.response = response(0, false, 2);
    entries.push_back(e);
    const QuestionResponseCache cache =
        QuestionResponseCache::restore(8, CacheMode::filtered, true, entries);
    CHECK(cache.size() == 2);
    CHECK(cache.correct_count() == 1);
    CHECK_THROWS_AS(
        QuestionResponseCache::restore(1, CacheMode::random_sampling, true, entries), DataError);
}

TEST_CASE("static dataset construction is frozen balanced and seeded") {
    WorldConfig config;
    config.num_questions = 16;
    const World world = World::build(config);
    Rng rng(10);
    const PolicyParams params = PolicyParams::random_init(PolicyShape{}, 0.1, rng);
    const QuestionResponseCache a = build_static_dataset(world, params, 6, 3);
    const QuestionResponseCache b = build_static_dataset(world, params, 6, 3);
    CHECK(a.mode() == CacheMode::static_set);
    CHECK(a.size() > 0);
    CHECK(a.size() <= 16 * 2);
    CHECK(a.balanced());
    REQUIRE(a.size() == b.size());
    auto ita = a.entries().begin();
    auto itb = b.entries().begin();
    for (; ita != a.entries().end(); ++ita, ++itb) {
        CHECK(ita->response.strategy == itb->response.strategy);
        CHECK(ita->correct == itb->correct);
    }
    CHECK_THROWS_AS(build_static_dataset(world, params, 1, 3), ArgumentError);
}

TEST_CASE("a world with only correct responses cannot form a dataset") {
    WorldConfig config;
    config.num_questions = 2;
    config.num_strategies = 1;
    config.feature_dim = 2;
    std::vector<Question> questions;
    for (int i = 0; i < 2; ++i) {
        Question q;
        q.id = i;
        q.features = {1.0, -1.0};
        q.success_probs = {1.0};
        questions.push_back(q);
    }
    const World world = World::restore(config, std::move(questions));
    const PolicyParams params{PolicyShape{2, 2, 1}};
    CHECK_THROWS_AS(build_static_dataset(world, params, 4, 1), DataError);
}

TEST_CASE("cache mode names round trip") {
    for (CacheMode m :
         {CacheMode::filtered, CacheMode::random_sampling, CacheMode::static_set})
        CHECK(cache_mode_from_string(to_string(m)) == m);
    CHECK(to_string(CacheMode::static_set) == "static");
}
