#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gencrit/policy.hpp"
#include "gencrit/rng.hpp"
#include "gencrit/world.hpp"

namespace gencrit {

enum class CacheMode {
    filtered,         // balanced correct/wrong pairs from the mixed-group filter
    random_sampling,  // raw responses, no label balance guarantee
    static_set,       // frozen dataset, sampling does not consume
};

std::string to_string(CacheMode mode);
CacheMode cache_mode_from_string(const std::string& name);

struct CacheEntry {
    int question_id = 0;
    ResponseRecord response;
    bool correct = false;
    int inserted_step = 0;
};

/// Keep one correct and one wrong response from a same-question group, chosen
/// uniformly; groups that are entirely correct or entirely wrong yield nothing.
std::optional<std::pair<ResponseRecord, ResponseRecord>> filter_group(
    const std::vector<ResponseRecord>& responses, Rng& rng);

/// Store of <question, response> pairs feeding critique rollout.
///
/// In filtered mode the correct:wrong counts are equal after every push;
/// capacity eviction removes the oldest correct and oldest wrong entry
/// together, and sampling draws the same number from each class, so the
/// balance is an invariant of the step cycle, not just an expectation.
class QuestionResponseCache {
  public:
    explicit QuestionResponseCache(std::size_t capacity = 8192,
                                   CacheMode mode = CacheMode::filtered)
        : capacity_(capacity), mode_(mode) {}

    /// Rebuild from snapshot data; enforces the filtered-balance invariant.
    static QuestionResponseCache restore(std::size_t capacity, CacheMode mode,
                                         bool consume_on_sample,
                                         std::vector<CacheEntry> entries);

    CacheMode mode() const { return mode_; }
    std::size_t capacity() const { return capacity_; }
    /// Dynamic modes erase sampled entries by default; turning this off keeps
    /// them for later steps while still forbidding duplicates within a call.
    bool consume_on_sample() const { return consume_on_sample_; }
    void set_consume_on_sample(bool consume) { consume_on_sample_ = consume; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::size_t correct_count() const { return correct_count_; }
    std::size_t wrong_count() const { return size() - correct_count_; }
    bool balanced() const { return correct_count() == wrong_count(); }
    const std::deque<CacheEntry>& entries() const { return entries_; }

    /// Append (correct, wrong) pairs; filtered mode only.
    void push_pairs(const std::vector<std::pair<ResponseRecord, ResponseRecord>>& pairs,
                    int step);

    /// Append raw responses regardless of label; random_sampling mode only.
    void push_raw(const std::vector<ResponseRecord>& responses, int step);

    struct SampleResult {
        std::vector<CacheEntry> entries;
        bool starved = false;  // fewer entries available than requested
    };

    /// Draw up to `count` entries without replacement. Dynamic modes consume
    /// the drawn entries; static mode leaves the store untouched. Filtered
    /// mode draws equally from both classes (count is rounded down to even).
    SampleResult sample(std::size_t count, Rng& rng);

    /// Freeze the current contents as a static dataset.
    void freeze() { mode_ = CacheMode::static_set; }

  private:
    void evict_to_capacity_();

    std::size_t capacity_;
    CacheMode mode_;
    bool consume_on_sample_ = true;
    std::deque<CacheEntry> entries_;
    std::size_t correct_count_ = 0;
};

/// Pre-sample `per_question` responses per question from a fixed policy, run
/// the balance filter, and freeze the surviving pairs as a static dataset.
/// Throws DataError if no question yields a mixed group.
QuestionResponseCache build_static_dataset(const World& world, const PolicyParams& snapshot,
                                           int per_question, std::uint64_t seed);

}  // namespace gencrit
