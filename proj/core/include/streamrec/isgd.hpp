#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>

#include "streamrec/core.hpp"

namespace streamrec {

// How one SGD pass applies the two row updates. `sequential` feeds the
// already-updated user row into the item-row update; `simultaneous` computes
// both updates from the pre-pass rows.
enum class UpdateRule { sequential, simultaneous };

// Factor state and SGD of a single model, addressed by dense indices.
// Identifier interning lives in the owner (IsgdModel or BaggedModel), so the
// ensemble can share one global index across nodes.
class IsgdNode {
public:
    IsgdNode(const Hyperparameters& hp, std::uint64_t seed,
             UpdateRule rule = UpdateRule::sequential);

    void ensure_user_row(std::uint32_t user_idx);
    void ensure_item_row(std::uint32_t item_idx);

    // hp.iter passes of err = 1 - A_u.B_i followed by the two row updates.
    // Both rows must exist. Throws ModelDivergence if any updated entry is
    // non-finite.
    void train_pair(std::uint32_t user_idx, std::uint32_t item_idx);

    // A_u . B_i, or absent when either row is missing.
    std::optional<double> predict(std::uint32_t user_idx,
                                  std::uint32_t item_idx) const;

    bool has_user(std::uint32_t user_idx) const {
        return users_.has_row(user_idx);
    }
    bool has_item(std::uint32_t item_idx) const {
        return items_.has_row(item_idx);
    }

    const FactorMatrix& user_factors() const { return users_; }
    const FactorMatrix& item_factors() const { return items_; }
    FactorMatrix& user_factors() { return users_; }
    FactorMatrix& item_factors() { return items_; }
    const Hyperparameters& hp() const { return hp_; }

    // Whole-state copy used by the clone warm-up mode; the RNG stream of the
    // destination node is left untouched.
    void copy_factors_from(const IsgdNode& other);

    bool state_equals(const IsgdNode& other) const {
        return users_ == other.users_ && items_ == other.items_;
    }

private:
    Hyperparameters hp_;
    UpdateRule rule_;
    FactorMatrix users_;
    FactorMatrix items_;
    GaussianSource rng_;
};

// Incremental SGD matrix factorization for positive-only feedback, with the
// |1 - score| ranking function.
class IsgdModel final : public Recommender {
public:
    IsgdModel(const Hyperparameters& hp, std::uint64_t seed,
              UpdateRule rule = UpdateRule::sequential);

    // Interns both ids, lazily initializes missing rows (user first, then
    // item), then trains the pair.
    void update(const InteractionEvent& event) override;

    std::optional<double> score(const std::string& user,
                                const std::string& item) const override;

    // Ranks all known items not in `exclude` by |1 - score| ascending with
    // dense-index tie-break; at most n entries. The user must be known.
    RankedList recommend(const std::string& user, std::size_t n,
                         const ItemSet& exclude) const override;

    bool knows_user(const std::string& user) const override;
    bool knows_item(const std::string& item) const override;

    void train_pair(std::uint32_t user_idx, std::uint32_t item_idx) {
        node_.train_pair(user_idx, item_idx);
    }

    const IsgdNode& node() const { return node_; }
    IsgdNode& node() { return node_; }
    const IdIndex& user_index() const { return user_index_; }
    const IdIndex& item_index() const { return item_index_; }
    IdIndex& user_index() { return user_index_; }
    IdIndex& item_index() { return item_index_; }
    const Hyperparameters& hp() const { return node_.hp(); }

private:
    IdIndex user_index_;
    IdIndex item_index_;
    IsgdNode node_;
};

namespace detail {

struct Candidate {
    double deviation;  // |1 - score|
    std::uint32_t item_idx;
    double score;
};

// Shared by IsgdModel and BaggedModel: order by deviation, tie-break on
// dense index, keep the first n, resolve external ids.
RankedList take_top_n(std::vector<Candidate>&& candidates, std::size_t n,
                      const IdIndex& item_index);

// exclude holds external ids; the scan works on dense indices.
std::unordered_set<std::uint32_t> resolve_excluded(const ItemSet& exclude,
                                                   const IdIndex& item_index);

}  // namespace detail

}  // namespace streamrec
