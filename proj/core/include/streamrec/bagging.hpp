#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "streamrec/isgd.hpp"
#include "streamrec/parallel.hpp"

namespace streamrec {

// Poisson(1) bootstrap-count sampler, P(K = k) = e^-1 / k!. Knuth's product
// method: exact over the full support, no truncation.
class PoissonSampler {
public:
    explicit PoissonSampler(std::uint64_t seed) : engine_(seed) {}

    std::uint32_t draw() {
        std::uint32_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= detail::uniform_unit(engine_);
        } while (p > kInvE);
        return k - 1;
    }

    static double pmf(std::uint32_t k) {
        double factorial = 1.0;
        for (std::uint32_t j = 2; j <= k; ++j) factorial *= j;
        return kInvE / factorial;
    }

private:
    static constexpr double kInvE = 0.36787944117144232159552377016146;
    std::mt19937_64 engine_;
};

// What a node missing one of the two factor rows contributes to the
// ensemble average.
enum class MissingNodeScore {
    as_zero,    // contributes 0, denominator stays M
    skip_node,  // averaged over holding nodes only
};

// Per-node seeds derived as child streams of one master seed, so node
// parallelism and node count cannot perturb each other's draws.
struct NodeSeeds {
    std::uint64_t factors;
    std::uint64_t bootstrap;
};

// Online-bagging ensemble: M independent ISGD nodes trained on Poisson(1)
// resampled event counts, scored by the all-node average.
class BaggedModel final : public Recommender {
public:
    BaggedModel(const Hyperparameters& hp, std::size_t nodes,
                std::uint64_t master_seed,
                MissingNodeScore missing = MissingNodeScore::as_zero,
                unsigned threads = 1, UpdateRule rule = UpdateRule::sequential);

    // Explicit per-node seeds, for experiments that need controlled node
    // states. The master-seed constructor guarantees pairwise-distinct seeds;
    // this one takes them as given.
    BaggedModel(const Hyperparameters& hp, std::vector<NodeSeeds> seeds,
                MissingNodeScore missing = MissingNodeScore::as_zero,
                unsigned threads = 1, UpdateRule rule = UpdateRule::sequential);

    static std::uint64_t node_factor_seed(std::uint64_t master,
                                          std::size_t node) {
        return derive_stream_seed(master, 2 * static_cast<std::uint64_t>(node));
    }
    static std::uint64_t node_bootstrap_seed(std::uint64_t master,
                                             std::size_t node) {
        return derive_stream_seed(master,
                                  2 * static_cast<std::uint64_t>(node) + 1);
    }

    // Interns globally, then per node: draws a bootstrap count c and, when
    // c > 0, initializes missing rows and trains the pair c times. Nodes
    // drawing c = 0 are untouched.
    void update(const InteractionEvent& event) override;

    // Node-averaged score; absent only when no node holds both rows.
    std::optional<double> score(const std::string& user,
                                const std::string& item) const override;

    // Same ranking semantics as IsgdModel::recommend over the node-averaged
    // score. Per-node dot products run in parallel across the thread budget;
    // the per-item sum always accumulates in node order, so the result is
    // independent of the thread count.
    RankedList recommend(const std::string& user, std::size_t n,
                         const ItemSet& exclude) const override;

    bool knows_user(const std::string& user) const override;
    bool knows_item(const std::string& item) const override;

    // Replaces the per-node Poisson draw; node ordinal in, count out.
    // `--stub-sampler-one` installs [](auto) { return 1; }.
    void set_bootstrap_override(std::function<std::uint32_t(std::size_t)> fn) {
        bootstrap_override_ = std::move(fn);
    }

    // Clone warm-up: trains a single donor on the slice, then copies its
    // factors into every node. The alternative to resampled warm-up, where
    // the slice simply goes through update().
    void warmup_by_cloning(const std::vector<InteractionEvent>& events);

    std::size_t node_count() const noexcept { return nodes_.size(); }
    const IsgdNode& node(std::size_t m) const { return nodes_[m]; }
    IsgdNode& node(std::size_t m) { return nodes_[m]; }
    const IdIndex& user_index() const { return user_index_; }
    const IdIndex& item_index() const { return item_index_; }

    // Total bootstrap repetitions performed so far (sum of all c draws that
    // trained). Instrumentation for cost accounting.
    std::uint64_t total_repetitions() const noexcept {
        return total_repetitions_;
    }

private:
    std::optional<double> aggregate(std::uint32_t user_idx,
                                    std::uint32_t item_idx) const;

    IdIndex user_index_;
    IdIndex item_index_;
    Hyperparameters hp_;
    MissingNodeScore missing_;
    std::vector<IsgdNode> nodes_;
    std::vector<PoissonSampler> samplers_;
    std::function<std::uint32_t(std::size_t)> bootstrap_override_;
    std::uint64_t donor_seed_ = 0;
    std::uint64_t total_repetitions_ = 0;
    mutable std::unique_ptr<ThreadPool> pool_;
};

}  // namespace streamrec
