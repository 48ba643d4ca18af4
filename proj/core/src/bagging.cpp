#include "streamrec/bagging.hpp"

#include <cmath>
#include <stdexcept>

namespace streamrec {

namespace {

std::vector<NodeSeeds> derive_node_seeds(std::uint64_t master,
                                         std::size_t nodes) {
    std::vector<NodeSeeds> seeds;
    seeds.reserve(nodes);
    for (std::size_t m = 0; m < nodes; ++m)
        seeds.push_back({BaggedModel::node_factor_seed(master, m),
                         BaggedModel::node_bootstrap_seed(master, m)});
    return seeds;
}

}  // namespace

BaggedModel::BaggedModel(const Hyperparameters& hp, std::size_t nodes,
                         std::uint64_t master_seed, MissingNodeScore missing,
                         unsigned threads, UpdateRule rule)
    : BaggedModel(hp, derive_node_seeds(master_seed, nodes), missing, threads,
                  rule) {}

BaggedModel::BaggedModel(const Hyperparameters& hp,
                         std::vector<NodeSeeds> seeds, MissingNodeScore missing,
                         unsigned threads, UpdateRule rule)
    : hp_(hp), missing_(missing) {
    if (seeds.empty())
        throw std::invalid_argument("ensemble needs at least one node");
    hp_.validate();
    donor_seed_ = seeds.front().factors;
    nodes_.reserve(seeds.size());
    samplers_.reserve(seeds.size());
    for (const auto& s : seeds) {
        nodes_.emplace_back(hp_, s.factors, rule);
        samplers_.emplace_back(s.bootstrap);
    }
    if (threads > 1) pool_ = std::make_unique<ThreadPool>(threads);
}

void BaggedModel::update(const InteractionEvent& event) {
    const std::uint32_t u = user_index_.intern(event.user);
    const std::uint32_t i = item_index_.intern(event.item);

    // Nodes train sequentially; only the recommendation step fans out to
    // threads. Each node consumes exactly one bootstrap draw per event.
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
        const std::uint32_t count =
            bootstrap_override_ ? bootstrap_override_(m) : samplers_[m].draw();
        if (count == 0) continue;
        try {
            nodes_[m].ensure_user_row(u);
            nodes_[m].ensure_item_row(i);
            for (std::uint32_t rep = 0; rep < count; ++rep)
                nodes_[m].train_pair(u, i);
        } catch (const ModelDivergence& ex) {
            throw ModelDivergence("node " + std::to_string(m) + ": " +
                                  ex.what());
        }
        total_repetitions_ += count;
    }
}

std::optional<double> BaggedModel::aggregate(std::uint32_t user_idx,
                                             std::uint32_t item_idx) const {
    double sum = 0.0;
    std::size_t holding = 0;
    for (const auto& node : nodes_) {
        if (const auto s = node.predict(user_idx, item_idx)) {
            sum += *s;
            ++holding;
        }
    }
    if (holding == 0) return std::nullopt;
    const double denom = missing_ == MissingNodeScore::as_zero
                             ? static_cast<double>(nodes_.size())
                             : static_cast<double>(holding);
    return sum / denom;
}

std::optional<double> BaggedModel::score(const std::string& user,
                                         const std::string& item) const {
    const auto u = user_index_.lookup(user);
    const auto i = item_index_.lookup(item);
    if (!u || !i) return std::nullopt;
    return aggregate(*u, *i);
}

bool BaggedModel::knows_user(const std::string& user) const {
    const auto u = user_index_.lookup(user);
    if (!u) return false;
    for (const auto& node : nodes_)
        if (node.has_user(*u)) return true;
    return false;
}

bool BaggedModel::knows_item(const std::string& item) const {
    const auto i = item_index_.lookup(item);
    if (!i) return false;
    for (const auto& node : nodes_)
        if (node.has_item(*i)) return true;
    return false;
}

RankedList BaggedModel::recommend(const std::string& user, std::size_t n,
                                  const ItemSet& exclude) const {
    if (!knows_user(user))
        throw std::invalid_argument("recommend: unknown user " + user);
    const std::uint32_t u = *user_index_.lookup(user);

    const auto excluded = detail::resolve_excluded(exclude, item_index_);
    std::vector<std::uint32_t> candidates;
    candidates.reserve(item_index_.size());
    for (std::uint32_t idx = 0; idx < item_index_.size(); ++idx)
        if (!excluded.contains(idx)) candidates.push_back(idx);

    const std::size_t m_count = nodes_.size();
    const std::size_t c_count = candidates.size();

    // One score row per node, filled independently, then reduced in node
    // order so threading cannot change the sums.
    std::vector<double> node_scores(m_count * c_count, 0.0);
    std::vector<std::uint8_t> node_holds(m_count * c_count, 0);

    const auto score_node = [&](std::size_t m) {
        const IsgdNode& node = nodes_[m];
        if (!node.has_user(u)) return;
        const auto user_row = node.user_factors().row(u);
        double* scores = node_scores.data() + m * c_count;
        std::uint8_t* holds = node_holds.data() + m * c_count;
        for (std::size_t c = 0; c < c_count; ++c) {
            const std::uint32_t idx = candidates[c];
            if (!node.has_item(idx)) continue;
            scores[c] = dot(user_row, node.item_factors().row(idx));
            holds[c] = 1;
        }
    };

    if (pool_)
        pool_->parallel_for(m_count, score_node);
    else
        for (std::size_t m = 0; m < m_count; ++m) score_node(m);

    std::vector<detail::Candidate> scored;
    scored.reserve(c_count);
    for (std::size_t c = 0; c < c_count; ++c) {
        double sum = 0.0;
        std::size_t holding = 0;
        for (std::size_t m = 0; m < m_count; ++m) {
            sum += node_scores[m * c_count + c];
            holding += node_holds[m * c_count + c];
        }
        if (holding == 0) continue;  // unknown to every node
        const double denom = missing_ == MissingNodeScore::as_zero
                                 ? static_cast<double>(m_count)
                                 : static_cast<double>(holding);
        const double s = sum / denom;
        scored.push_back({std::abs(1.0 - s), candidates[c], s});
    }
    return detail::take_top_n(std::move(scored), n, item_index_);
}

void BaggedModel::warmup_by_cloning(const std::vector<InteractionEvent>& events) {
    // Donor follows the node-0 factor stream; node RNGs stay untouched so
    // later lazy initializations draw from their own streams as usual.
    IsgdNode donor(hp_, donor_seed_);
    for (const auto& event : events) {
        const std::uint32_t u = user_index_.intern(event.user);
        const std::uint32_t i = item_index_.intern(event.item);
        donor.ensure_user_row(u);
        donor.ensure_item_row(i);
        donor.train_pair(u, i);
    }
    for (auto& node : nodes_) node.copy_factors_from(donor);
}

}  // namespace streamrec
