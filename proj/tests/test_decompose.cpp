#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "glex/decompose.hpp"
#include "glex/synth.hpp"
#include "support.hpp"

using namespace glex;
using namespace glex::testing;

namespace {

const std::vector<double>& component(const ComponentStore& store, FeatureSet s) {
    const auto it = store.components.find(s);
    REQUIRE(it != store.components.end());
    return it->second;
}

void check_rows(const std::vector<double>& got, const std::vector<double>& want, double tol) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

}  // namespace

TEST_CASE("single-leaf ensemble decomposes to its intercept") {
    TreeEnsemble ens;
    ens.d = 1;
    ens.feature_names = {"f0"};
    ens.base_offset = 0.25;
    Tree tree;
    tree.nodes.resize(1);
    tree.nodes[0].value = 0.5;
    tree.nodes[0].cover = 7.0;
    tree.finalize_feature_set();
    ens.trees.push_back(tree);

    const Dataset data = make_dataset({"f0"}, {{1.0}, {2.0}});
    for (const ComponentStore store : {decompose_naive(ens, data), decompose_fast(ens, data)}) {
        CHECK(store.intercept == 0.75);
        CHECK(store.components.empty());
        CHECK(store.n_rows == 2);
        CHECK(store.max_order() == 0);
    }
}

TEST_CASE("depth-1 hand values") {
    const TreeEnsemble ens = depth1_ensemble();
    const Dataset data = make_dataset({"f0"}, {{0.3}, {0.7}});
    for (const ComponentStore store : {decompose_naive(ens, data), decompose_fast(ens, data)}) {
        CHECK(store.intercept == doctest::Approx(1.8).epsilon(1e-15));
        REQUIRE(store.components.size() == 1);
        check_rows(component(store, FeatureSet::single(0)), {-0.8, 1.2}, 1e-15);
    }
}

TEST_CASE("depth-2 hand values") {
    const TreeEnsemble ens = depth2_ensemble();
    const Dataset data = quadrant_dataset();
    for (const ComponentStore store : {decompose_naive(ens, data), decompose_fast(ens, data)}) {
        CHECK(store.intercept == doctest::Approx(2.0).epsilon(1e-15));
        REQUIRE(store.components.size() == 3);
        CHECK(store.max_order() == 2);
        check_rows(component(store, FeatureSet::single(0)), {-1.5, 1.5, -1.5, 1.5}, 1e-15);
        check_rows(component(store, FeatureSet::single(1)), {-1.0, 1.0, 1.0, -1.0}, 1e-15);
        check_rows(component(store, FeatureSet::of({0, 1})), {0.5, 0.5, -0.5, -0.5}, 1e-15);
        for (std::size_t i = 0; i < data.n; ++i) {
            CHECK(store_row_sum(store, i) ==
                  doctest::Approx(predict(ens, data.row(i))).epsilon(1e-15));
        }
    }
}

TEST_CASE("components accumulate across trees") {
    TreeEnsemble ens = depth1_ensemble();
    ens.trees.push_back(ens.trees[0]);
    const Dataset data = make_dataset({"f0"}, {{0.3}, {0.7}});
    const ComponentStore store = decompose_fast(ens, data);
    CHECK(store.intercept == doctest::Approx(3.6).epsilon(1e-15));
    check_rows(component(store, FeatureSet::single(0)), {-1.6, 2.4}, 1e-15);
}

TEST_CASE("decomposition matches the inclusion-exclusion oracle") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const TreeEnsemble ens = random_ensemble(
            {.d = 7,
             .n_trees = 8,
             .max_depth = 1 + static_cast<int>(seed % 4),
             .seed = seed * 101,
             .rule = seed % 2 ? ComparisonRule::less_than : ComparisonRule::less_or_equal});
        const Dataset data = random_dataset(16, 7, seed * 19);
        const ComponentStore store = decompose_naive(ens, data);

        const std::vector<double> zeros(7, 0.0);
        CHECK(std::abs(store.intercept - coalition_value(ens, FeatureSet(), zeros)) <= 1e-10);
        for (const auto& [s, vals] : store.components) {
            for (std::size_t i = 0; i < data.n; ++i) {
                CHECK(std::abs(vals[i] - oracle_component(ens, s, data.row(i))) <= 1e-10);
            }
        }
        // a subset no tree realizes decomposes to exactly nothing
        FeatureSet everything = FeatureSet::full(7);
        bool realized_everything = false;
        for (const Tree& tree : ens.trees) {
            if (tree.feature_set == everything) realized_everything = true;
        }
        if (!realized_everything) {
            CHECK(store.components.find(everything) == store.components.end());
            CHECK(std::abs(oracle_component(ens, everything, data.row(0))) <= 1e-9);
        }
    }
}

TEST_CASE("fast and naive paths agree") {
    SUBCASE("fixtures") {
        const Dataset d1 = make_dataset({"f0"}, {{0.3}, {0.7}});
        CHECK(store_distance(decompose_naive(depth1_ensemble(), d1),
                             decompose_fast(depth1_ensemble(), d1)) <= 1e-10);
        CHECK(store_distance(decompose_naive(depth2_ensemble(), quadrant_dataset()),
                             decompose_fast(depth2_ensemble(), quadrant_dataset())) <= 1e-10);
    }
    SUBCASE("random ensembles") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const TreeEnsemble ens = random_ensemble(
                {.d = 8,
                 .n_trees = 30,
                 .max_depth = 1 + static_cast<int>(seed % 5),
                 .seed = seed * 7 + 3,
                 .rule = seed % 2 ? ComparisonRule::less_than : ComparisonRule::less_or_equal});
            const Dataset data = random_dataset(100, 8, seed);
            CHECK(store_distance(decompose_naive(ens, data), decompose_fast(ens, data)) <= 1e-10);
        }
    }
}

TEST_CASE("fast path does not depend on the thread count") {
    const TreeEnsemble ens = random_ensemble({.d = 6, .n_trees = 40, .max_depth = 4, .seed = 5});
    const Dataset data = random_dataset(64, 6, 6);
    const ComponentStore one = decompose_fast(ens, data, {.threads = 1});
    const ComponentStore four = decompose_fast(ens, data, {.threads = 4});
    CHECK(store_distance(one, four) == 0.0);
}

TEST_CASE("decomposition is exact: rows sum to predictions") {
    for (std::uint64_t seed = 2; seed <= 8; ++seed) {
        const TreeEnsemble ens = random_ensemble(
            {.d = 6, .n_trees = 20, .max_depth = 4, .seed = seed * 31, .leaf_prob = 0.4});
        const Dataset data = random_dataset(50, 6, seed + 100);
        const ComponentStore store = decompose_fast(ens, data);
        const std::vector<double> preds = predict(ens, data);
        for (std::size_t i = 0; i < data.n; ++i) {
            CHECK(std::abs(store_row_sum(store, i) - preds[i]) <= 1e-9);
        }
    }
}

TEST_CASE("coalition values equal subset sums of components") {
    const TreeEnsemble ens = random_ensemble({.d = 6, .n_trees = 15, .max_depth = 3, .seed = 41});
    const Dataset data = random_dataset(20, 6, 17);
    const ComponentStore store = decompose_fast(ens, data);
    for (const std::uint64_t mask : {0x0ull, 0x3ull, 0x15ull, 0x2aull, 0x3full}) {
        const FeatureSet u(mask);
        for (std::size_t i = 0; i < data.n; ++i) {
            double subset_sum = store.intercept;
            for (const auto& [s, vals] : store.components) {
                if (s.is_subset_of(u)) subset_sum += vals[i];
            }
            CHECK(std::abs(coalition_value(ens, u, data.row(i)) - subset_sum) <= 1e-9);
        }
    }
}

TEST_CASE("splitting a leaf into equal halves changes nothing") {
    // Extends the depth-1 tree with a vacuous split on f1 whose leaves carry
    // the same value: the decomposition must not move.
    TreeEnsemble refined = depth1_ensemble();
    refined.d = 2;
    refined.feature_names = {"f0", "f1"};
    Tree& tree = refined.trees[0];
    tree.nodes.resize(5);
    tree.nodes[1].feature = 1;  // the old left leaf becomes the vacuous split
    tree.nodes[1].threshold = 0.0;
    tree.nodes[1].left = 3;
    tree.nodes[1].right = 4;
    tree.nodes[3].value = 1.0;
    tree.nodes[3].cover = 30.0;
    tree.nodes[4].value = 1.0;
    tree.nodes[4].cover = 30.0;
    tree.finalize_feature_set();
    REQUIRE(validate(refined).empty());

    const Dataset data = make_dataset({"f0", "f1"}, {{0.3, -1.0}, {0.7, 2.0}, {0.3, 1.0}});
    const ComponentStore store = decompose_fast(refined, data);
    CHECK(store.intercept == doctest::Approx(1.8).epsilon(1e-12));
    check_rows(component(store, FeatureSet::single(0)), {-0.8, 1.2, -0.8}, 1e-10);
    // the vacuous split contributes exactly nothing
    for (const FeatureSet s : {FeatureSet::single(1), FeatureSet::of({0, 1})}) {
        const auto it = store.components.find(s);
        if (it == store.components.end()) continue;
        for (double v : it->second) CHECK(std::abs(v) <= 1e-15);
    }
}

TEST_CASE("realized subsets are subsets of tree feature sets") {
    const TreeEnsemble ens = random_ensemble({.d = 10, .n_trees = 12, .max_depth = 3, .seed = 23});
    const Dataset data = random_dataset(8, 10, 2);
    const ComponentStore store = decompose_fast(ens, data);
    for (const auto& [s, vals] : store.components) {
        CHECK(!s.empty());
        CHECK(vals.size() == data.n);
        bool covered = false;
        for (const Tree& tree : ens.trees) {
            if (s.is_subset_of(tree.feature_set)) covered = true;
        }
        CHECK(covered);
    }
}

TEST_CASE("interaction cap guards the exponential blowup") {
    const TreeEnsemble ens = random_ensemble({.d = 8, .n_trees = 4, .max_depth = 5, .seed = 1,
                                              .leaf_prob = 0.0});
    int widest = 0;
    for (const Tree& tree : ens.trees) widest = std::max(widest, tree.feature_set.count());
    REQUIRE(widest >= 3);

    const Dataset data = random_dataset(4, 8, 3);
    CHECK_THROWS_AS((void)decompose_fast(ens, data, {.max_interaction = widest - 1}),
                    guard_error);
    CHECK_THROWS_AS((void)decompose_naive(ens, data, {.max_interaction = widest - 1}),
                    guard_error);
    try {
        (void)decompose_fast(ens, data, {.max_interaction = widest - 1});
    } catch (const guard_error& e) {
        CHECK(std::string(e.what()).find(std::to_string(widest - 1)) != std::string::npos);
    }
    CHECK_NOTHROW((void)decompose_fast(ens, data, {.max_interaction = widest}));
}

TEST_CASE("empty dataset still yields the intercept") {
    const TreeEnsemble ens = depth1_ensemble();
    Dataset data;
    data.d = 1;
    data.column_names = {"f0"};
    for (const ComponentStore store : {decompose_naive(ens, data), decompose_fast(ens, data)}) {
        CHECK(store.n_rows == 0);
        CHECK(store.intercept == doctest::Approx(1.8).epsilon(1e-15));
        for (const auto& [s, vals] : store.components) CHECK(vals.empty());
    }
}
