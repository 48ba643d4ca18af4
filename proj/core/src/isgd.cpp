#include "streamrec/isgd.hpp"

#include <algorithm>
#include <cmath>

namespace streamrec {

IsgdNode::IsgdNode(const Hyperparameters& hp, std::uint64_t seed,
                   UpdateRule rule)
    : hp_(hp), rule_(rule), users_(hp.k), items_(hp.k), rng_(seed) {
    hp_.validate();
}

void IsgdNode::ensure_user_row(std::uint32_t user_idx) {
    if (!users_.has_row(user_idx))
        users_.init_row(user_idx, rng_, hp_.init_mean, hp_.init_stddev);
}

void IsgdNode::ensure_item_row(std::uint32_t item_idx) {
    if (!items_.has_row(item_idx))
        items_.init_row(item_idx, rng_, hp_.init_mean, hp_.init_stddev);
}

void IsgdNode::train_pair(std::uint32_t user_idx, std::uint32_t item_idx) {
    auto user = users_.row(user_idx);  // throws if missing
    auto item = items_.row(item_idx);
    const int k = hp_.k;
    const double eta = hp_.eta;
    const double lambda = hp_.lambda;

    for (int pass = 0; pass < hp_.iter; ++pass) {
        const double err = 1.0 - dot(user, item);
        if (rule_ == UpdateRule::sequential) {
            // The item update reads the already-updated user row; err stays
            // at its pre-pass value.
            for (int j = 0; j < k; ++j)
                user[j] += eta * (err * item[j] - lambda * user[j]);
            for (int j = 0; j < k; ++j)
                item[j] += eta * (err * user[j] - lambda * item[j]);
        } else {
            for (int j = 0; j < k; ++j) {
                const double u = user[j];
                const double v = item[j];
                user[j] += eta * (err * v - lambda * u);
                item[j] += eta * (err * u - lambda * v);
            }
        }
    }

    for (int j = 0; j < k; ++j) {
        if (!std::isfinite(user[j]) || !std::isfinite(item[j]))
            throw ModelDivergence("non-finite factor after training pair (" +
                                  std::to_string(user_idx) + ", " +
                                  std::to_string(item_idx) + ")");
    }
}

std::optional<double> IsgdNode::predict(std::uint32_t user_idx,
                                        std::uint32_t item_idx) const {
    if (!users_.has_row(user_idx) || !items_.has_row(item_idx))
        return std::nullopt;
    return dot(users_.row(user_idx), items_.row(item_idx));
}

void IsgdNode::copy_factors_from(const IsgdNode& other) {
    users_ = other.users_;
    items_ = other.items_;
}

IsgdModel::IsgdModel(const Hyperparameters& hp, std::uint64_t seed,
                     UpdateRule rule)
    : node_(hp, seed, rule) {}

void IsgdModel::update(const InteractionEvent& event) {
    const std::uint32_t u = user_index_.intern(event.user);
    const std::uint32_t i = item_index_.intern(event.item);
    node_.ensure_user_row(u);
    node_.ensure_item_row(i);
    node_.train_pair(u, i);
}

std::optional<double> IsgdModel::score(const std::string& user,
                                       const std::string& item) const {
    const auto u = user_index_.lookup(user);
    const auto i = item_index_.lookup(item);
    if (!u || !i) return std::nullopt;
    return node_.predict(*u, *i);
}

bool IsgdModel::knows_user(const std::string& user) const {
    const auto u = user_index_.lookup(user);
    return u && node_.has_user(*u);
}

bool IsgdModel::knows_item(const std::string& item) const {
    const auto i = item_index_.lookup(item);
    return i && node_.has_item(*i);
}

RankedList IsgdModel::recommend(const std::string& user, std::size_t n,
                                const ItemSet& exclude) const {
    const auto u = user_index_.lookup(user);
    if (!u || !node_.has_user(*u))
        throw std::invalid_argument("recommend: unknown user " + user);

    const auto excluded = detail::resolve_excluded(exclude, item_index_);
    const auto user_row = node_.user_factors().row(*u);

    std::vector<detail::Candidate> candidates;
    candidates.reserve(item_index_.size());
    for (std::uint32_t idx = 0; idx < item_index_.size(); ++idx) {
        if (excluded.contains(idx) || !node_.has_item(idx)) continue;
        const double s = dot(user_row, node_.item_factors().row(idx));
        candidates.push_back({std::abs(1.0 - s), idx, s});
    }
    return detail::take_top_n(std::move(candidates), n, item_index_);
}

namespace detail {

RankedList take_top_n(std::vector<Candidate>&& candidates, std::size_t n,
                      const IdIndex& item_index) {
    const auto less = [](const Candidate& a, const Candidate& b) {
        if (a.deviation != b.deviation) return a.deviation < b.deviation;
        return a.item_idx < b.item_idx;
    };
    const std::size_t take = std::min(n, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + take,
                      candidates.end(), less);

    RankedList ranked;
    ranked.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        ranked.push_back(
            {item_index.external(candidates[i].item_idx), candidates[i].score});
    return ranked;
}

std::unordered_set<std::uint32_t> resolve_excluded(const ItemSet& exclude,
                                                   const IdIndex& item_index) {
    std::unordered_set<std::uint32_t> excluded;
    excluded.reserve(exclude.size());
    for (const auto& id : exclude) {
        if (auto idx = item_index.lookup(id)) excluded.insert(*idx);
    }
    return excluded;
}

}  // namespace detail

}  // namespace streamrec
