#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "glex/decompose.hpp"
#include "glex/marginalize.hpp"
#include "glex/model.hpp"

namespace glex::testing {

// Depth-1 fixture: split f0 @ 0.5, covers 60/40, leaf values 1.0 / 3.0.
// Hand values: full marginalization 0.6*1 + 0.4*3 = 1.8, so the intercept is
// 1.8 and m_{f0} is -0.8 left of the split and +1.2 right of it.
inline TreeEnsemble depth1_ensemble() {
    TreeEnsemble ens;
    ens.d = 1;
    ens.feature_names = {"f0"};
    ens.base_offset = 0.0;
    ens.comparison_rule = ComparisonRule::less_than;
    Tree tree;
    tree.root = 0;
    tree.nodes.resize(3);
    tree.nodes[0].feature = 0;
    tree.nodes[0].threshold = 0.5;
    tree.nodes[0].left = 1;
    tree.nodes[0].right = 2;
    tree.nodes[0].cover = 100.0;
    tree.nodes[1].value = 1.0;
    tree.nodes[1].cover = 60.0;
    tree.nodes[2].value = 3.0;
    tree.nodes[2].cover = 40.0;
    tree.finalize_feature_set();
    ens.trees.push_back(std::move(tree));
    return ens;
}

// Depth-2 fixture: root splits f0 @ 0, both children split f1 @ 0, all four
// leaves cover 25 with values 0 / 1 / 2 / 5 (quadrants --, -+, +-, ++).
// Hand values at the four sign quadrants:
//   intercept 2.0
//   m_{f0}      = -1.5 / +1.5 by sign of x0
//   m_{f1}      = -1.0 / +1.0 by sign of x1
//   m_{f0,f1}   = +0.5 when signs agree, -0.5 otherwise
inline TreeEnsemble depth2_ensemble() {
    TreeEnsemble ens;
    ens.d = 2;
    ens.feature_names = {"f0", "f1"};
    ens.base_offset = 0.0;
    ens.comparison_rule = ComparisonRule::less_than;
    Tree tree;
    tree.root = 0;
    tree.nodes.resize(7);
    auto split = [&](int id, int feature, int left, int right, double cover) {
        tree.nodes[id].feature = feature;
        tree.nodes[id].threshold = 0.0;
        tree.nodes[id].left = left;
        tree.nodes[id].right = right;
        tree.nodes[id].cover = cover;
    };
    auto leaf = [&](int id, double value, double cover) {
        tree.nodes[id].value = value;
        tree.nodes[id].cover = cover;
    };
    split(0, 0, 1, 2, 100.0);
    split(1, 1, 3, 4, 50.0);
    split(2, 1, 5, 6, 50.0);
    leaf(3, 0.0, 25.0);
    leaf(4, 1.0, 25.0);
    leaf(5, 2.0, 25.0);
    leaf(6, 5.0, 25.0);
    tree.finalize_feature_set();
    ens.trees.push_back(std::move(tree));
    return ens;
}

// The four sign quadrants, one row per quadrant: --, ++, -+, +-.
inline Dataset quadrant_dataset() {
    Dataset data;
    data.n = 4;
    data.d = 2;
    data.column_names = {"f0", "f1"};
    data.values = {-1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0, -1.0};
    return data;
}

inline Dataset make_dataset(std::vector<std::string> names,
                            const std::vector<std::vector<double>>& rows) {
    Dataset data;
    data.d = names.size();
    data.n = rows.size();
    data.column_names = std::move(names);
    for (const auto& row : rows) {
        for (double v : row) data.values.push_back(v);
    }
    return data;
}

// Coalition value: everything outside `coalition` marginalized out of every
// tree. The ∅ coalition is the full marginalization of the model.
inline double coalition_value(const TreeEnsemble& ens, FeatureSet coalition,
                              std::span<const double> x) {
    double v = ens.base_offset;
    for (const Tree& tree : ens.trees) {
        v += marginal_predict(tree, ens.comparison_rule, tree.feature_set - coalition, x);
    }
    return v;
}

// Independent component oracle: the inclusion-exclusion of coalition values
// over all V ⊆ S. A completely different summation route than the per-tree
// accumulation in decompose_*, so agreement is meaningful.
inline double oracle_component(const TreeEnsemble& ens, FeatureSet s, std::span<const double> x) {
    double acc = 0.0;
    for_each_subset_desc(s, [&](FeatureSet v) {
        const double value = coalition_value(ens, v, x);
        acc += ((s.count() - v.count()) & 1) ? -value : value;
    });
    return acc;
}

// Cover-weighted leaf mean, computed by a recursion unrelated to
// marginal_predict: the expected value of the fully marginalized tree.
inline double leaf_mean(const Tree& tree, std::int32_t id, double weight) {
    const TreeNode& node = tree.nodes[id];
    if (node.is_leaf()) return weight * node.value;
    return leaf_mean(tree, node.left, weight * tree.nodes[node.left].cover / node.cover) +
           leaf_mean(tree, node.right, weight * tree.nodes[node.right].cover / node.cover);
}

inline double leaf_mean(const Tree& tree) { return leaf_mean(tree, tree.root, 1.0); }

// Largest absolute difference between the stores' values (and intercepts);
// stores must realize identical subsets, else returns +inf.
inline double store_distance(const ComponentStore& a, const ComponentStore& b) {
    if (a.components.size() != b.components.size() || a.n_rows != b.n_rows) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = std::abs(a.intercept - b.intercept);
    auto ita = a.components.begin();
    auto itb = b.components.begin();
    for (; ita != a.components.end(); ++ita, ++itb) {
        if (ita->first != itb->first) return std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ita->second.size(); ++i) {
            worst = std::max(worst, std::abs(ita->second[i] - itb->second[i]));
        }
    }
    return worst;
}

// Sum of the intercept and every component at one row.
inline double store_row_sum(const ComponentStore& store, std::size_t i) {
    double acc = store.intercept;
    for (const auto& [s, vals] : store.components) acc += vals[i];
    return acc;
}

}  // namespace glex::testing
