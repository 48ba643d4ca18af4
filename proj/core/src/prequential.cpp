#include "streamrec/prequential.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace streamrec {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start)
        .count();
}

}  // namespace

void EvalConfig::validate() const {
    if (cutoffs.empty()) throw std::invalid_argument("cutoffs must not be empty");
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        if (cutoffs[i] < 1)
            throw std::invalid_argument("cutoffs must be positive");
        if (i > 0 && cutoffs[i] <= cutoffs[i - 1])
            throw std::invalid_argument("cutoffs must be strictly ascending");
    }
    if (static_cast<std::size_t>(cutoffs.back()) > list_size)
        throw std::invalid_argument("max cutoff exceeds list size");
    if (moving_avg_window < 1)
        throw std::invalid_argument("moving average window must be >= 1");
    if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
        throw std::invalid_argument("warmup fraction must be in [0, 1)");
}

const char* to_string(StepStatus status) {
    switch (status) {
        case StepStatus::scored: return "scored";
        case StepStatus::skipped_unknown_user: return "skipped_unknown_user";
        case StepStatus::skipped_repeat: return "skipped_repeat";
    }
    return "unknown";
}

std::vector<std::uint8_t> score_step(const RankedList& ranked,
                                     const std::string& observed,
                                     const std::vector<int>& cutoffs) {
    // Rank of the observed item, 1-based; 0 when absent.
    std::size_t rank = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (ranked[i].item == observed) {
            rank = i + 1;
            break;
        }
    }
    std::vector<std::uint8_t> recall(cutoffs.size(), 0);
    for (std::size_t c = 0; c < cutoffs.size(); ++c)
        recall[c] = rank != 0 && rank <= static_cast<std::size_t>(cutoffs[c]);
    return recall;
}

RunOutcome run(std::span<const InteractionEvent> stream, Recommender& model,
               const EvalConfig& cfg, SeenSets& seen) {
    cfg.validate();
    RunOutcome out;
    out.records.reserve(stream.size());

    std::size_t position = 0;
    for (const auto& event : stream) {
        ++position;
        StepRecord record;
        record.position = position;
        try {
            if (!model.knows_user(event.user)) {
                record.status = StepStatus::skipped_unknown_user;
            } else if (seen.contains(event.user, event.item)) {
                // Repeated pair: the observed item sits in the exclusion set,
                // so scoring is bypassed but the update still happens.
                record.status = StepStatus::skipped_repeat;
            } else {
                const auto start = Clock::now();
                const RankedList ranked =
                    model.recommend(event.user, cfg.list_size,
                                    seen.items(event.user));
                record.rec_ms = ms_since(start);
                record.recall = score_step(ranked, event.item, cfg.cutoffs);
                record.status = StepStatus::scored;
            }
            if (cfg.update_during_eval) {
                const auto start = Clock::now();
                model.update(event);
                record.update_ms = ms_since(start);
            }
        } catch (const ModelDivergence& ex) {
            out.error = "step " + std::to_string(position) + ": " + ex.what();
            break;
        }
        seen.add(event.user, event.item);
        out.records.push_back(std::move(record));
    }
    return out;
}

void train_unscored(std::span<const InteractionEvent> events,
                    Recommender& model, SeenSets& seen) {
    for (const auto& event : events) {
        model.update(event);
        seen.add(event.user, event.item);
    }
}

Summary summarize(const std::vector<StepRecord>& records,
                  const std::vector<int>& cutoffs) {
    Summary out;
    out.cutoffs = cutoffs;
    std::vector<double> recall_sums(cutoffs.size(), 0.0);
    double update_sum = 0.0, rec_sum = 0.0;
    std::size_t update_count = 0, rec_count = 0;

    for (const auto& record : records) {
        switch (record.status) {
            case StepStatus::scored: ++out.scored; break;
            case StepStatus::skipped_unknown_user:
                ++out.skipped_unknown_user;
                break;
            case StepStatus::skipped_repeat: ++out.skipped_repeat; break;
        }
        if (record.status == StepStatus::scored)
            for (std::size_t c = 0; c < cutoffs.size(); ++c)
                recall_sums[c] += record.recall[c];
        if (record.update_ms) {
            update_sum += *record.update_ms;
            ++update_count;
        }
        if (record.rec_ms) {
            rec_sum += *record.rec_ms;
            ++rec_count;
        }
    }

    out.mean_recall.resize(cutoffs.size());
    for (std::size_t c = 0; c < cutoffs.size(); ++c)
        if (out.scored > 0)
            out.mean_recall[c] = recall_sums[c] / static_cast<double>(out.scored);
    if (update_count > 0)
        out.mean_update_ms = update_sum / static_cast<double>(update_count);
    if (rec_count > 0) out.mean_rec_ms = rec_sum / static_cast<double>(rec_count);
    return out;
}

std::vector<double> moving_average(const std::vector<double>& series,
                                   std::size_t window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    std::vector<double> out;
    out.reserve(series.size());
    double sum = 0.0;
    for (std::size_t p = 0; p < series.size(); ++p) {
        sum += series[p];
        if (p >= window) sum -= series[p - window];
        const std::size_t denom = std::min(p + 1, window);
        out.push_back(sum / static_cast<double>(denom));
    }
    return out;
}

std::vector<double> scored_series(const std::vector<StepRecord>& records,
                                  std::size_t cutoff_index) {
    std::vector<double> out;
    for (const auto& record : records)
        if (record.status == StepStatus::scored)
            out.push_back(record.recall.at(cutoff_index));
    return out;
}

}  // namespace streamrec
