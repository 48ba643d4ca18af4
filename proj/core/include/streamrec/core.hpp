#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "streamrec/rng.hpp"

namespace streamrec {

// One chronological positive-feedback record. Rating and timestamp are
// carried through ingestion only; the models consume bare (user, item) pairs.
struct InteractionEvent {
    std::string user;
    std::string item;
    std::optional<double> rating;
    std::optional<std::int64_t> timestamp;

    bool operator==(const InteractionEvent&) const = default;
};

// Input-file defect, annotated with the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Semantically invalid data (e.g. missing rating where one is required,
// out-of-order timestamps).
class DataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A factor entry became non-finite during training.
class ModelDivergence : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Interns opaque external identifiers into dense 0-based indices, assigned
// in first-seen order and never reused.
class IdIndex {
public:
    std::uint32_t intern(const std::string& id) {
        auto [it, inserted] =
            forward_.try_emplace(id, static_cast<std::uint32_t>(reverse_.size()));
        if (inserted) reverse_.push_back(id);
        return it->second;
    }

    std::optional<std::uint32_t> lookup(const std::string& id) const {
        auto it = forward_.find(id);
        if (it == forward_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& external(std::uint32_t idx) const {
        return reverse_.at(idx);
    }

    std::size_t size() const noexcept { return reverse_.size(); }

private:
    std::unordered_map<std::string, std::uint32_t> forward_;
    std::vector<std::string> reverse_;
};

struct Hyperparameters {
    int k = 8;              // latent dimensionality
    int iter = 1;           // SGD passes per training pair
    double lambda = 0.01;   // regularization factor
    double eta = 0.05;      // learn rate
    double init_mean = 0.0;
    double init_stddev = 0.1;

    void validate() const {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
        if (iter < 1) throw std::invalid_argument("iter must be >= 1");
        if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
        if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
        if (!(init_stddev >= 0.0))
            throw std::invalid_argument("init_stddev must be >= 0");
    }
};

// Grow-on-demand map from dense entity index to a length-k factor row.
// Rows are created once and never removed.
class FactorMatrix {
public:
    explicit FactorMatrix(int k) : k_(k) {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
    }

    int k() const noexcept { return k_; }

    bool has_row(std::uint32_t idx) const noexcept {
        return idx < present_.size() && present_[idx] != 0;
    }

    // Draws exactly k variates from rng, in entry order.
    void init_row(std::uint32_t idx, GaussianSource& rng, double mean,
                  double stddev) {
        if (has_row(idx))
            throw std::logic_error("factor row " + std::to_string(idx) +
                                   " already initialized");
        if (idx >= present_.size()) {
            present_.resize(idx + 1, 0);
            data_.resize(static_cast<std::size_t>(idx + 1) * k_, 0.0);
        }
        double* row = data_.data() + static_cast<std::size_t>(idx) * k_;
        for (int j = 0; j < k_; ++j) row[j] = rng.next(mean, stddev);
        present_[idx] = 1;
        ++row_count_;
    }

    std::span<const double> row(std::uint32_t idx) const {
        check_row(idx);
        return {data_.data() + static_cast<std::size_t>(idx) * k_,
                static_cast<std::size_t>(k_)};
    }

    std::span<double> row(std::uint32_t idx) {
        check_row(idx);
        return {data_.data() + static_cast<std::size_t>(idx) * k_,
                static_cast<std::size_t>(k_)};
    }

    std::size_t row_count() const noexcept { return row_count_; }

    bool operator==(const FactorMatrix&) const = default;

private:
    void check_row(std::uint32_t idx) const {
        if (!has_row(idx))
            throw std::logic_error("no factor row at index " +
                                   std::to_string(idx));
    }

    int k_;
    std::vector<double> data_;
    std::vector<std::uint8_t> present_;
    std::size_t row_count_ = 0;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
    return acc;
}

struct ScoredItem {
    std::string item;
    double score;

    bool operator==(const ScoredItem&) const = default;
};

// Recommendation candidates ordered by |1 - score| ascending, ties broken
// by ascending dense item index.
using RankedList = std::vector<ScoredItem>;

using ItemSet = std::unordered_set<std::string>;

// Contract shared by the single model and the ensemble. The prequential
// driver guarantees update and the read operations never overlap.
class Recommender {
public:
    virtual ~Recommender() = default;

    virtual void update(const InteractionEvent& event) = 0;
    virtual std::optional<double> score(const std::string& user,
                                        const std::string& item) const = 0;
    virtual RankedList recommend(const std::string& user, std::size_t n,
                                 const ItemSet& exclude) const = 0;
    virtual bool knows_user(const std::string& user) const = 0;
    virtual bool knows_item(const std::string& item) const = 0;
};

}  // namespace streamrec
