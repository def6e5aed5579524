#include <cmath>

#include "doctest.h"
#include "mibids/ensemble.hpp"
#include "mibids/error.hpp"
#include "mibids/rng.hpp"
#include "support.hpp"

using namespace mibids;
using testsupport::random_dataset;

namespace {

DecisionTree leaf_tree(std::vector<double> dist) {
    TreeNode n;
    n.distribution = std::move(dist);
    const std::size_t k = n.distribution.size();
    return DecisionTree(1, k, {n});
}

}  // namespace

TEST_CASE("default feature sample size") {
    CHECK(default_feature_sample_size(8) == 4);
    CHECK(default_feature_sample_size(34) == 6);
    CHECK(default_feature_sample_size(1) == 1);
}

TEST_CASE("forest has the requested number of trees") {
    const Dataset d = random_dataset(1, 200, 4, 3);
    ForestConfig cfg;
    CHECK(train_forest(d, cfg).trees().size() == 100);
    cfg.n_trees = 7;
    CHECK(train_forest(d, cfg).trees().size() == 7);
}

TEST_CASE("degenerate forest equals one unpruned tree") {
    const Dataset d = random_dataset(2, 300, 4, 3);
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.bootstrap = false;
    cfg.feature_sample_size = 4;
    const Forest f = train_forest(d, cfg);
    TreeConfig tc;
    tc.pruning = false;
    tc.min_leaf_weight = 1.0;
    const DecisionTree t = train_tree(d, tc);
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-10, 10);
        CHECK(f.predict(x) == t.predict(x));
    }
    for (const auto& r : d.records()) CHECK(f.predict(r.values) == r.label);
}

TEST_CASE("forest training is deterministic across worker counts") {
    const Dataset d = random_dataset(4, 300, 5, 3);
    ForestConfig cfg;
    cfg.n_trees = 20;
    cfg.seed = 77;
    cfg.workers = 1;
    const Forest a = train_forest(d, cfg);
    CHECK(a == train_forest(d, cfg));
    cfg.workers = 4;
    CHECK(a == train_forest(d, cfg));
    cfg.seed = 78;
    CHECK(!(a == train_forest(d, cfg)));
}

TEST_CASE("forest probability averaging") {
    const Forest agree(1, 2, {leaf_tree({1, 0}), leaf_tree({1, 0})});
    const double x[] = {0.0};
    CHECK(agree.predict_proba(x) == std::vector<double>{1, 0});

    const Forest split(1, 2, {leaf_tree({1, 0}), leaf_tree({0, 1})});
    CHECK(split.predict_proba(x) == std::vector<double>{0.5, 0.5});
    CHECK(split.predict(x) == 0);
}

TEST_CASE("forest vector equals the mean of per-tree queries") {
    const Dataset d = random_dataset(5, 150, 3, 3);
    ForestConfig cfg;
    cfg.n_trees = 5;
    const Forest f = train_forest(d, cfg);
    Rng rng(1);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> x(3);
        for (auto& v : x) v = rng.uniform(-10, 10);
        std::vector<double> mean(3, 0.0);
        for (const auto& t : f.trees()) {
            const auto p = t.predict_proba(x);
            for (std::size_t c = 0; c < 3; ++c) mean[c] += p[c] / 5.0;
        }
        const auto got = f.predict_proba(x);
        for (std::size_t c = 0; c < 3; ++c) CHECK(got[c] == doctest::Approx(mean[c]).epsilon(1e-12));
    }
}

TEST_CASE("adaboost reweighting example") {
    std::vector<double> w(4, 0.25);
    const std::vector<bool> correct{false, true, true, true};
    const double beta = adaboost_reweight(w, correct, 0.25);
    CHECK(beta == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-15));
    for (int i = 1; i < 4; ++i) CHECK(w[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("perfect first tree ends boosting") {
    const Dataset d = make_dataset(FeatureSchema{{"x"}}, {{0}, {1}, {2}, {3}}, {"A", "A", "B", "B"});
    TreeConfig fine;
    fine.min_leaf_weight = 1.0;
    BoostTrace trace;
    const auto e = train_adaboost_m1(d, BoostConfig{}, fine, &trace);
    CHECK(e.stages().size() == 1);
    CHECK(trace.rounds.size() == 1);
    CHECK(trace.rounds[0].error == 0.0);
    CHECK(e.stages()[0].alpha == doctest::Approx(std::log(1e10)));
}

TEST_CASE("weak first tree is kept alone") {
    const Dataset d = testsupport::noisy_dataset(3, 200, 2, 4);
    TreeConfig stump;
    stump.min_leaf_weight = 100.0;
    BoostTrace trace;
    const auto e = train_adaboost_m1(d, BoostConfig{}, stump, &trace);
    REQUIRE(trace.rounds.size() == 1);
    CHECK(trace.rounds[0].error >= 0.5);
    REQUIRE(e.stages().size() == 1);
    CHECK(e.stages()[0].alpha == 1.0);
}

TEST_CASE("boosting invariants") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Dataset d = testsupport::noisy_dataset(seed, 120, 3, 2);
        BoostConfig cfg;
        cfg.seed = seed;
        BoostTrace trace;
        const auto e = train_adaboost_m1(d, cfg, TreeConfig{}, &trace);
        CHECK(e.stages().size() <= cfg.n_rounds);
        CHECK(!e.stages().empty());
        for (const auto& r : trace.rounds) {
            if (r.retained) CHECK(r.weight_sum == doctest::Approx(1.0).epsilon(1e-9));
        }
        for (const auto& s : e.stages()) CHECK(s.alpha > 0.0);
    }
}

TEST_CASE("boosted vote tally") {
    const Dataset d = random_dataset(9, 200, 3, 3);
    BoostConfig cfg;
    cfg.n_rounds = 3;
    TreeConfig small;
    small.min_leaf_weight = 20.0;
    const auto e = train_adaboost_m1(d, cfg, small);
    CHECK(e.stages().size() == 3);
    Rng rng(4);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> x(3);
        for (auto& v : x) v = rng.uniform(-10, 10);
        std::vector<double> votes(3, 0.0);
        for (const auto& s : e.stages()) votes[s.tree.predict(x)] += s.alpha;
        std::size_t best = 0;
        for (std::size_t c = 1; c < 3; ++c)
            if (votes[c] > votes[best]) best = c;
        CHECK(e.predict(x) == best);
    }
}

TEST_CASE("two equal votes tie towards the lowest class") {
    const double a = std::log(3.0);
    const BoostedEnsemble e(1, 2, {{leaf_tree({1, 0}), a}, {leaf_tree({0, 1}), a}});
    const double x[] = {0.0};
    CHECK(e.predict_proba(x) == std::vector<double>{0.5, 0.5});
    CHECK(e.predict(x) == 0);
    const BoostedEnsemble one(1, 2, {{leaf_tree({0.2, 0.8}), 2.0}});
    CHECK(one.predict_proba(x) == std::vector<double>{0, 1});
}

TEST_CASE("adaboost is deterministic") {
    const Dataset d = testsupport::noisy_dataset(5, 150, 3, 3);
    const auto a = train_adaboost_m1(d, BoostConfig{}, TreeConfig{});
    CHECK(a == train_adaboost_m1(d, BoostConfig{}, TreeConfig{}));
}
