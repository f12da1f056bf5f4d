#pragma once

#include <span>
#include <vector>

#include "glex/model.hpp"

namespace glex {

// Expectation of a single tree under the empirical distribution of the
// features in U, with the remaining features fixed at x: at a split on
// j ∈ U both branches are taken, weighted by cover(child)/cover(parent);
// at a split on j ∉ U the branch is chosen by x[j]. U = ∅ reproduces the
// plain prediction; U ⊇ feature_set ignores x entirely.
double marginal_predict(const Tree& tree, ComparisonRule rule, FeatureSet u,
                        std::span<const double> x);

// All 2^|T| marginal predictions of one tree for every dataset row, T being
// the tree's feature set. Column c holds U = FeatureSet::from_rank(c, T);
// storage is column-major.
struct SubsetMatrix {
    FeatureSet tree_features;
    std::size_t n_rows = 0;
    std::vector<double> values;  // (1 << |T|) columns of n_rows each

    std::size_t columns() const { return values.size() / (n_rows == 0 ? 1 : n_rows); }

    const double* column(int c) const { return values.data() + static_cast<std::size_t>(c) * n_rows; }
    double* column(int c) { return values.data() + static_cast<std::size_t>(c) * n_rows; }

    double value(std::size_t row, FeatureSet u) const {
        return column(u.rank_within(tree_features))[row];
    }
};

// Computes the full SubsetMatrix in a single traversal of the tree. The
// recursion carries, per subtree, only the columns over that subtree's own
// split features, so a node touching k features costs n * 2^k instead of
// n * 2^|T|; results are identical to calling marginal_predict per column.
SubsetMatrix marginal_predict_all(const Tree& tree, ComparisonRule rule, const Dataset& data);

}  // namespace glex
