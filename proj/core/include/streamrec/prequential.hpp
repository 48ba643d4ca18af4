#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "streamrec/core.hpp"

namespace streamrec {

struct EvalConfig {
    std::vector<int> cutoffs{1, 5, 10, 20};  // strictly ascending
    std::size_t list_size = 20;
    std::size_t moving_avg_window = 10000;
    double warmup_fraction = 0.10;
    bool update_during_eval = true;

    void validate() const;
};

enum class StepStatus : std::uint8_t {
    scored,
    skipped_unknown_user,
    skipped_repeat,
};

const char* to_string(StepStatus status);

// Items each user has co-occurred with, warm-up included. Grows only.
class SeenSets {
public:
    void add(const std::string& user, const std::string& item) {
        seen_[user].insert(item);
    }

    bool contains(const std::string& user, const std::string& item) const {
        auto it = seen_.find(user);
        return it != seen_.end() && it->second.contains(item);
    }

    const ItemSet& items(const std::string& user) const {
        auto it = seen_.find(user);
        return it == seen_.end() ? empty_ : it->second;
    }

private:
    std::unordered_map<std::string, ItemSet> seen_;
    inline static const ItemSet empty_{};
};

// Outcome of one prequential step. `recall` is aligned with the run's
// cutoffs and present only for scored steps; values are 0 or 1.
struct StepRecord {
    std::size_t position = 0;  // 1-based ordinal in the evaluation stream
    StepStatus status = StepStatus::scored;
    std::vector<std::uint8_t> recall;
    std::optional<double> update_ms;
    std::optional<double> rec_ms;
};

// recall per cutoff: 1 iff `observed` is among the first C entries.
std::vector<std::uint8_t> score_step(const RankedList& ranked,
                                     const std::string& observed,
                                     const std::vector<int>& cutoffs);

struct RunOutcome {
    std::vector<StepRecord> records;
    // Divergence diagnostic; records up to the failure point are kept.
    std::optional<std::string> error;
};

// The per-event loop: recommend (if the user is known and the pair is
// unseen), score against the observed item, then update and record the pair
// as seen. `seen` should already hold the warm-up pairs.
RunOutcome run(std::span<const InteractionEvent> stream, Recommender& model,
               const EvalConfig& cfg, SeenSets& seen);

// Warm-up pass: updates the model and the seen sets, no scoring, no timing.
void train_unscored(std::span<const InteractionEvent> events,
                    Recommender& model, SeenSets& seen);

struct Summary {
    std::vector<int> cutoffs;
    // Parallel to cutoffs; absent when no step was scored.
    std::vector<std::optional<double>> mean_recall;
    std::optional<double> mean_update_ms;
    std::optional<double> mean_rec_ms;
    std::size_t scored = 0;
    std::size_t skipped_unknown_user = 0;
    std::size_t skipped_repeat = 0;
};

Summary summarize(const std::vector<StepRecord>& records,
                  const std::vector<int>& cutoffs);

// Accumulated mean for the first window-1 positions, then the mean of the
// last `window` values.
std::vector<double> moving_average(const std::vector<double>& series,
                                   std::size_t window);

// Recall values of scored steps, in stream order, for one cutoff index.
std::vector<double> scored_series(const std::vector<StepRecord>& records,
                                  std::size_t cutoff_index);

}  // namespace streamrec
