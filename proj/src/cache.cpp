#include "gencrit/cache.hpp"

#include <algorithm>

#include "gencrit/errors.hpp"

namespace gencrit {

std::string to_string(CacheMode mode) {
    switch (mode) {
        case CacheMode::filtered: return "filtered";
        case CacheMode::random_sampling: return "random_sampling";
        case CacheMode::static_set: return "static";
    }
    return "filtered";
}

CacheMode cache_mode_from_string(const std::string& name) {
    if (name == "filtered") return CacheMode::filtered;
    if (name == "random_sampling") return CacheMode::random_sampling;
    if (name == "static") return CacheMode::static_set;
    throw ConfigError("cache.mode: unknown value '" + name + "'");
}

std::optional<std::pair<ResponseRecord, ResponseRecord>> filter_group(
    const std::vector<ResponseRecord>& responses, Rng& rng) {
    if (responses.empty()) throw ArgumentError("filter_group: empty response list");
    std::vector<std::size_t> correct_idx;
    std::vector<std::size_t> wrong_idx;
    for (std::size_t i = 0; i < responses.size(); ++i)
        (responses[i].correct ? correct_idx : wrong_idx).push_back(i);
    if (correct_idx.empty() || wrong_idx.empty()) return std::nullopt;
    const ResponseRecord& c = responses[correct_idx[rng.uniform_index(correct_idx.size())]];
    const ResponseRecord& w = responses[wrong_idx[rng.uniform_index(wrong_idx.size())]];
    return std::make_pair(c, w);
}

QuestionResponseCache QuestionResponseCache::restore(std::size_t capacity, CacheMode mode,
                                                     bool consume_on_sample,
                                                     std::vector<CacheEntry> entries) {
    if (entries.size() > capacity) throw DataError("cache restore: more entries than capacity");
    QuestionResponseCache cache(capacity, mode);
    cache.consume_on_sample_ = consume_on_sample;
    for (CacheEntry& entry : entries) {
        if (entry.correct) ++cache.correct_count_;
        cache.entries_.push_back(std::move(entry));
    }
    if (mode == CacheMode::filtered && !cache.balanced())
        throw DataError("cache restore: filtered cache is unbalanced");
    return cache;
}

void QuestionResponseCache::push_pairs(
    const std::vector<std::pair<ResponseRecord, ResponseRecord>>& pairs, int step) {
    if (mode_ == CacheMode::static_set)
        throw ModeError("cache: push into a static dataset");
    if (mode_ != CacheMode::filtered)
        throw ModeError("cache: push_pairs requires filtered mode");
    for (const auto& [correct, wrong] : pairs) {
        if (!correct.correct || wrong.correct)
            throw ArgumentError("push_pairs: pair must be (correct, wrong)");
        entries_.push_back({correct.question_id, correct, true, step});
        ++correct_count_;
        entries_.push_back({wrong.question_id, wrong, false, step});
    }
    evict_to_capacity_();
}

void QuestionResponseCache::push_raw(const std::vector<ResponseRecord>& responses, int step) {
    if (mode_ == CacheMode::static_set)
        throw ModeError("cache: push into a static dataset");
    if (mode_ != CacheMode::random_sampling)
        throw ModeError("cache: push_raw requires random_sampling mode");
    for (const ResponseRecord& r : responses) {
        entries_.push_back({r.question_id, r, r.correct, step});
        if (r.correct) ++correct_count_;
    }
    evict_to_capacity_();
}

void QuestionResponseCache::evict_to_capacity_() {
    if (mode_ == CacheMode::filtered) {
        // evict oldest correct/wrong together so the 1:1 invariant survives
        while (entries_.size() > capacity_) {
            bool removed_correct = false;
            bool removed_wrong = false;
            for (auto it = entries_.begin(); it != entries_.end();) {
                const bool want = it->correct ? !removed_correct : !removed_wrong;
                if (want) {
                    (it->correct ? removed_correct : removed_wrong) = true;
                    if (it->correct) --correct_count_;
                    it = entries_.erase(it);
                    if (removed_correct && removed_wrong) break;
                } else {
                    ++it;
                }
            }
            if (!removed_correct && !removed_wrong) break;
        }
    } else {
        while (entries_.size() > capacity_) {
            if (entries_.front().correct) --correct_count_;
            entries_.pop_front();
        }
    }
}

QuestionResponseCache::SampleResult QuestionResponseCache::sample(std::size_t count, Rng& rng) {
    SampleResult result;
    if (entries_.empty()) {
        result.starved = true;
        return result;
    }

    std::vector<std::size_t> picked;
    if (mode_ == CacheMode::filtered) {
        std::size_t take = std::min(count, entries_.size());
        take -= take % 2;  // equal split across classes
        std::vector<std::size_t> correct_idx;
        std::vector<std::size_t> wrong_idx;
        for (std::size_t i = 0; i < entries_.size(); ++i)
            (entries_[i].correct ? correct_idx : wrong_idx).push_back(i);
        const std::size_t per_class = take / 2;
        for (auto* pool : {&correct_idx, &wrong_idx}) {
            auto& idx = *pool;
            const std::size_t k = std::min(per_class, idx.size());
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t j = i + rng.uniform_index(idx.size() - i);
                std::swap(idx[i], idx[j]);
                picked.push_back(idx[i]);
            }
        }
    } else {
        std::vector<std::size_t> idx(entries_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        const std::size_t k = std::min(count, idx.size());
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + rng.uniform_index(idx.size() - i);
            std::swap(idx[i], idx[j]);
            picked.push_back(idx[i]);
        }
    }

    result.entries.reserve(picked.size());
    for (std::size_t i : picked) result.entries.push_back(entries_[i]);
    result.starved = result.entries.size() < count;

    if (mode_ != CacheMode::static_set && consume_on_sample_) {
        std::sort(picked.begin(), picked.end(), std::greater<>());
        for (std::size_t i : picked) {
            if (entries_[i].correct) --correct_count_;
            entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
        }
    }
    return result;
}

QuestionResponseCache build_static_dataset(const World& world, const PolicyParams& snapshot,
                                           int per_question, std::uint64_t seed) {
    if (per_question < 2) throw ArgumentError("build_static_dataset: per_question must be >= 2");
    policy::check_shape(snapshot, world);

    QuestionResponseCache cache(static_cast<std::size_t>(world.num_questions()) * 2,
                                CacheMode::filtered);
    std::vector<std::pair<ResponseRecord, ResponseRecord>> pairs;
    for (const Question& question : world.questions()) {
        Rng rng = Rng::derive(seed, {stream::kStaticData, static_cast<std::uint64_t>(question.id)});
        std::vector<ResponseRecord> responses;
        responses.reserve(per_question);
        for (int i = 0; i < per_question; ++i)
            responses.push_back(policy::sample_response(snapshot, world, question, rng));
        if (auto pair = filter_group(responses, rng)) pairs.push_back(std::move(*pair));
    }
    if (pairs.empty())
        throw DataError("build_static_dataset: no question produced a mixed group");
    cache.push_pairs(pairs, 0);
    cache.freeze();
    return cache;
}

}  // namespace gencrit
