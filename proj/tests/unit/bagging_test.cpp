#include <doctest.h>

#include <cmath>

#include "streamrec/bagging.hpp"
#include "testsupport.hpp"

using namespace streamrec;

namespace {

constexpr double kInvE = 0.36787944117144233;

std::vector<InteractionEvent> small_stream(std::size_t events,
                                           std::uint64_t seed = 1) {
    test::ClusteredStreamConfig cfg;
    cfg.users = 50;
    cfg.items = 40;
    cfg.clusters = 5;
    cfg.events = events;
    cfg.seed = seed;
    return test::clustered_stream(cfg);
}

}  // namespace

TEST_SUITE("bagging") {

TEST_CASE("pmf matches e^-1 / k!") {
    CHECK(PoissonSampler::pmf(0) == doctest::Approx(kInvE).epsilon(1e-12));
    CHECK(PoissonSampler::pmf(1) == doctest::Approx(kInvE).epsilon(1e-12));
    CHECK(PoissonSampler::pmf(2) ==
          doctest::Approx(kInvE / 2.0).epsilon(1e-12));
    CHECK(PoissonSampler::pmf(5) ==
          doctest::Approx(kInvE / 120.0).epsilon(1e-12));
}

TEST_CASE("bootstrap count distribution is the large-N limit of the binomial") {
    // Batch bootstrap: each example lands in one sample K ~ Binomial(N, 1/N)
    // times. As N grows this converges to the Poisson(1) pmf the sampler
    // implements.
    const auto binomial_pmf = [](double n, std::uint32_t k) {
        const double log_p = std::lgamma(n + 1) - std::lgamma(k + 1) -
                             std::lgamma(n - k + 1) - k * std::log(n) +
                             (n - k) * std::log1p(-1.0 / n);
        return std::exp(log_p);
    };

    double previous_gap = 1.0;
    for (const double n : {1e2, 1e4, 1e6}) {
        double gap = 0.0;
        for (std::uint32_t k = 0; k <= 8; ++k)
            gap = std::max(gap,
                           std::abs(binomial_pmf(n, k) - PoissonSampler::pmf(k)));
        CHECK(gap < previous_gap);  // monotone approach to the limit
        previous_gap = gap;
    }
    CHECK(previous_gap < 1e-6);  // at N = 10^6 the forms are indistinguishable
}

TEST_CASE("draw statistics match Poisson(1) for every node's sampler") {
    constexpr std::size_t kDraws = 1'000'000;
    // chi-square 0.999 quantile, 8 degrees of freedom
    constexpr double kChiSquareBound = 26.1245;

    for (const std::size_t node : {0, 1, 7}) {
        const auto stats = test::poisson_stats(
            BaggedModel::node_bootstrap_seed(42, node), kDraws);
        CAPTURE(node);
        CHECK(std::abs(stats.mean - 1.0) < 0.005);
        CHECK(std::abs(stats.variance - 1.0) < 0.01);
        CHECK(std::abs(stats.p0 - kInvE) < 0.003);
        CHECK(std::abs(stats.p1 - kInvE) < 0.003);
        CHECK(stats.chi_square < kChiSquareBound);
    }
}

TEST_CASE("one stubbed node reproduces the plain model bit for bit") {
    const auto events = small_stream(1000);

    BaggedModel bagged(Hyperparameters{}, 1, 42);
    bagged.set_bootstrap_override([](std::size_t) { return 1u; });
    IsgdModel plain(Hyperparameters{}, BaggedModel::node_factor_seed(42, 0));

    for (const auto& event : events) {
        bagged.update(event);
        plain.update(event);
    }
    CHECK(bagged.node(0).state_equals(plain.node()));

    // rankings must agree as well
    for (const auto& user : {"u0", "u7", "u23"}) {
        if (!plain.knows_user(user)) continue;
        CHECK(bagged.recommend(user, 10, {}) == plain.recommend(user, 10, {}));
    }
}

TEST_CASE("nodes drawing zero are untouched") {
    const auto events = small_stream(200);

    BaggedModel bagged(Hyperparameters{}, 3, 7);
    bagged.set_bootstrap_override([](std::size_t) { return 1u; });
    for (std::size_t i = 0; i < 100; ++i) bagged.update(events[i]);

    const FactorMatrix node0_users = bagged.node(0).user_factors();
    const FactorMatrix node0_items = bagged.node(0).item_factors();
    const FactorMatrix node2_users = bagged.node(2).user_factors();
    const FactorMatrix node2_items = bagged.node(2).item_factors();

    // now only node 1 trains
    bagged.set_bootstrap_override(
        [](std::size_t node) { return node == 1 ? 1u : 0u; });
    for (std::size_t i = 100; i < 200; ++i) bagged.update(events[i]);

    CHECK(bagged.node(0).user_factors() == node0_users);
    CHECK(bagged.node(0).item_factors() == node0_items);
    CHECK(bagged.node(2).user_factors() == node2_users);
    CHECK(bagged.node(2).item_factors() == node2_items);
    CHECK(!(bagged.node(1).user_factors() == node0_users));
}

TEST_CASE("expected training repetitions per event is the node count") {
    const auto events = small_stream(10000);
    BaggedModel bagged(Hyperparameters{}, 8, 3);
    for (const auto& event : events) bagged.update(event);

    const auto expected = 8.0 * static_cast<double>(events.size());
    const auto actual = static_cast<double>(bagged.total_repetitions());
    CHECK(actual > 0.95 * expected);
    CHECK(actual < 1.05 * expected);
}

TEST_CASE("aggregate score averages all nodes, missing rows as zero") {
    Hyperparameters hp;
    hp.k = 1;
    BaggedModel bagged(hp, 3, 11);
    // train nodes 0 and 1 once so (u, i) rows exist there but not in node 2
    bagged.set_bootstrap_override(
        [](std::size_t node) { return node == 2 ? 0u : 1u; });
    bagged.update({"u", "i"});

    auto set1 = [&](std::size_t node, double user, double item) {
        bagged.node(node).user_factors().row(0)[0] = user;
        bagged.node(node).item_factors().row(0)[0] = item;
    };
    set1(0, 1.0, 0.9);  // node score 0.9
    set1(1, 1.0, 0.6);  // node score 0.6

    CHECK(bagged.score("u", "i") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(!bagged.score("ghost", "i").has_value());
    CHECK(!bagged.score("u", "ghost").has_value());
}

TEST_CASE("skip policy averages over holding nodes only") {
    Hyperparameters hp;
    hp.k = 1;
    BaggedModel bagged(hp, 3, 11, MissingNodeScore::skip_node);
    bagged.set_bootstrap_override(
        [](std::size_t node) { return node == 2 ? 0u : 1u; });
    bagged.update({"u", "i"});
    bagged.node(0).user_factors().row(0)[0] = 1.0;
    bagged.node(0).item_factors().row(0)[0] = 0.9;
    bagged.node(1).user_factors().row(0)[0] = 1.0;
    bagged.node(1).item_factors().row(0)[0] = 0.6;

    CHECK(bagged.score("u", "i") == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("interned but never-trained entities are unknown") {
    BaggedModel bagged(Hyperparameters{}, 2, 5);
    bagged.set_bootstrap_override([](std::size_t) { return 0u; });
    bagged.update({"u", "i"});

    CHECK(!bagged.knows_user("u"));
    CHECK(!bagged.knows_item("i"));
    CHECK(!bagged.score("u", "i").has_value());
    CHECK_THROWS_AS(bagged.recommend("u", 5, {}), std::invalid_argument);
}

TEST_CASE("single node ensemble scores equal the node's dot product") {
    const auto events = small_stream(300);
    BaggedModel bagged(Hyperparameters{}, 1, 9);
    for (const auto& event : events) bagged.update(event);

    for (const auto& event : events) {
        const auto ensemble = bagged.score(event.user, event.item);
        const auto node = bagged.node(0).predict(
            *bagged.user_index().lookup(event.user),
            *bagged.item_index().lookup(event.item));
        if (!node) {
            CHECK(!ensemble.has_value());
            continue;
        }
        REQUIRE(ensemble.has_value());
        CHECK(*ensemble == *node);
    }
}

TEST_CASE("two identical nodes rank exactly like one") {
    Hyperparameters hp;
    const std::uint64_t factor_seed = 77;
    BaggedModel twins(hp, {{factor_seed, 1}, {factor_seed, 2}});
    twins.set_bootstrap_override([](std::size_t) { return 1u; });
    IsgdModel single(hp, factor_seed);

    for (const auto& event : small_stream(400)) {
        twins.update(event);
        single.update(event);
    }
    CHECK(twins.node(0).state_equals(twins.node(1)));
    for (const auto& user : {"u1", "u11", "u31"}) {
        if (!single.knows_user(user)) continue;
        const auto a = twins.recommend(user, 10, {});
        const auto b = single.recommend(user, 10, {});
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].item == b[i].item);
            // mean of two equal scores reproduces the score
            CHECK(a[i].score == doctest::Approx(b[i].score).epsilon(1e-12));
        }
    }
}

TEST_CASE("threaded recommendation is bit-identical to sequential") {
    const auto events = small_stream(1500);

    BaggedModel sequential(Hyperparameters{}, 8, 13,
                           MissingNodeScore::as_zero, 1);
    BaggedModel threaded(Hyperparameters{}, 8, 13, MissingNodeScore::as_zero,
                         4);
    for (const auto& event : events) {
        sequential.update(event);
        threaded.update(event);
    }

    for (const auto& user : {"u0", "u5", "u17", "u42"}) {
        if (!sequential.knows_user(user)) continue;
        CHECK(sequential.recommend(user, 20, {"i1"}) ==
              threaded.recommend(user, 20, {"i1"}));
    }
}

TEST_CASE("node state depends on its seeds, not its ordinal") {
    const auto events = small_stream(400);
    const std::vector<NodeSeeds> seeds{{101, 201}, {102, 202}, {103, 203}};
    const std::vector<NodeSeeds> permuted{{103, 203}, {101, 201}, {102, 202}};

    BaggedModel original(Hyperparameters{}, seeds);
    BaggedModel shuffled(Hyperparameters{}, permuted);
    for (const auto& event : events) {
        original.update(event);
        shuffled.update(event);
    }

    CHECK(original.node(0).state_equals(shuffled.node(1)));
    CHECK(original.node(1).state_equals(shuffled.node(2)));
    CHECK(original.node(2).state_equals(shuffled.node(0)));
}

TEST_CASE("clone warm-up copies one trained model into every node") {
    const auto events = small_stream(300);
    const std::vector<InteractionEvent> slice(events.begin(),
                                              events.begin() + 200);

    BaggedModel bagged(Hyperparameters{}, 3, 21);
    bagged.warmup_by_cloning(slice);

    // the donor is a plain model on the node-0 factor stream
    IsgdModel donor(Hyperparameters{}, BaggedModel::node_factor_seed(21, 0));
    for (const auto& event : slice) donor.update(event);

    for (std::size_t m = 0; m < 3; ++m) {
        CHECK(bagged.node(m).state_equals(donor.node()));
    }
    CHECK(bagged.knows_user(slice.front().user));

    // nodes drift apart again once resampled updates resume
    for (std::size_t i = 200; i < 300; ++i) bagged.update(events[i]);
    CHECK(!bagged.node(0).state_equals(bagged.node(1)));
}

TEST_CASE("divergence is annotated with the node ordinal") {
    Hyperparameters hp;
    hp.k = 1;
    hp.eta = 1e200;
    BaggedModel bagged(hp, 2, 3);
    bagged.set_bootstrap_override([](std::size_t) { return 1u; });
    try {
        for (int i = 0; i < 50; ++i) bagged.update({"u", "i"});
        FAIL("expected ModelDivergence");
    } catch (const ModelDivergence& ex) {
        CHECK(std::string(ex.what()).find("node ") != std::string::npos);
    }
}

TEST_CASE("master-seed constructor derives pairwise distinct node seeds") {
    std::unordered_set<std::uint64_t> seeds;
    for (std::size_t m = 0; m < 64; ++m) {
        seeds.insert(BaggedModel::node_factor_seed(42, m));
        seeds.insert(BaggedModel::node_bootstrap_seed(42, m));
    }
    CHECK(seeds.size() == 128);
}

}  // TEST_SUITE
