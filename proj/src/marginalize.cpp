#include "glex/marginalize.hpp"

#include <utility>

namespace glex {

namespace {

double marginal_node(const Tree& tree, ComparisonRule rule, FeatureSet u,
                     std::span<const double> x, std::int32_t id) {
    const TreeNode& node = tree.nodes[id];
    if (node.is_leaf()) return node.value;
    if (u.contains(node.feature)) {
        const double c_left = tree.nodes[node.left].cover / node.cover;
        const double c_right = tree.nodes[node.right].cover / node.cover;
        return c_left * marginal_node(tree, rule, u, x, node.left) +
               c_right * marginal_node(tree, rule, u, x, node.right);
    }
    const std::int32_t child =
        goes_left(rule, x[node.feature], node.threshold) ? node.left : node.right;
    return marginal_node(tree, rule, u, x, child);
}

}  // namespace

double marginal_predict(const Tree& tree, ComparisonRule rule, FeatureSet u,
                        std::span<const double> x) {
    return marginal_node(tree, rule, u, x, tree.root);
}

namespace {

// Marginal predictions of one subtree: one column per subset of the features
// split on inside that subtree.
struct PartialMatrix {
    FeatureSet features;
    std::vector<double> values;  // column-major, n rows per column
};

PartialMatrix matrix_node(const Tree& tree, ComparisonRule rule, const Dataset& data,
                          std::int32_t id) {
    const std::size_t n = data.n;
    const TreeNode& node = tree.nodes[id];
    if (node.is_leaf()) {
        return {FeatureSet(), std::vector<double>(n, node.value)};
    }

    PartialMatrix left = matrix_node(tree, rule, data, node.left);
    PartialMatrix right = matrix_node(tree, rule, data, node.right);

    const int j = node.feature;
    const FeatureSet features = left.features | right.features | FeatureSet::single(j);
    const int n_cols = 1 << features.count();
    const double c_left = tree.nodes[node.left].cover / node.cover;
    const double c_right = tree.nodes[node.right].cover / node.cover;

    std::vector<char> go_left(n);
    for (std::size_t i = 0; i < n; ++i) {
        go_left[i] = goes_left(rule, data.at(i, j), node.threshold);
    }

    PartialMatrix out;
    out.features = features;
    out.values.resize(static_cast<std::size_t>(n_cols) * n);
    for (int c = 0; c < n_cols; ++c) {
        const FeatureSet u = FeatureSet::from_rank(c, features);
        const double* lp = left.values.data() +
                           static_cast<std::size_t>((u & left.features).rank_within(left.features)) * n;
        const double* rp = right.values.data() +
                           static_cast<std::size_t>((u & right.features).rank_within(right.features)) * n;
        double* op = out.values.data() + static_cast<std::size_t>(c) * n;
        if (u.contains(j)) {
            for (std::size_t i = 0; i < n; ++i) op[i] = c_left * lp[i] + c_right * rp[i];
        } else {
            for (std::size_t i = 0; i < n; ++i) op[i] = go_left[i] ? lp[i] : rp[i];
        }
    }
    return out;
}

}  // namespace

SubsetMatrix marginal_predict_all(const Tree& tree, ComparisonRule rule, const Dataset& data) {
    PartialMatrix root = matrix_node(tree, rule, data, tree.root);

    SubsetMatrix out;
    out.tree_features = tree.feature_set;
    out.n_rows = data.n;
    // For a well-formed tree the root's features are exactly the tree's
    // feature set, so this is a move; tolerate mismatch anyway.
    if (root.features == tree.feature_set) {
        out.values = std::move(root.values);
        return out;
    }
    const int n_cols = 1 << tree.feature_set.count();
    out.values.resize(static_cast<std::size_t>(n_cols) * data.n);
    for (int c = 0; c < n_cols; ++c) {
        const FeatureSet u = FeatureSet::from_rank(c, tree.feature_set) & root.features;
        const double* src = root.values.data() +
                            static_cast<std::size_t>(u.rank_within(root.features)) * data.n;
        double* dst = out.values.data() + static_cast<std::size_t>(c) * data.n;
        for (std::size_t i = 0; i < data.n; ++i) dst[i] = src[i];
    }
    return out;
}

}  // namespace glex
