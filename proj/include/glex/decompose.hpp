#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "glex/model.hpp"

namespace glex {

// The additive decomposition of a model over a dataset: an intercept plus,
// for every realized feature subset S, the component values m_S(x_i) per row.
// Summing the intercept and all components of a row reproduces the model
// prediction for that row.
struct ComponentStore {
    double intercept = 0.0;
    std::size_t n_rows = 0;
    std::map<FeatureSet, std::vector<double>> components;

    // Highest interaction order present.
    int max_order() const {
        int q = 0;
        for (const auto& [s, vals] : components) q = std::max(q, s.count());
        return q;
    }

    std::vector<FeatureSet> realized_subsets() const {
        std::vector<FeatureSet> out;
        out.reserve(components.size());
        for (const auto& [s, vals] : components) out.push_back(s);
        return out;
    }
};

struct DecomposeOptions {
    // Trees whose feature set exceeds this order are refused (guard_error):
    // the per-tree cost grows as 2^|T|. The CLI seeds this from GLEX_MAX_DEPTH.
    int max_interaction = 10;
    // 0 → library default thread count. The naive path is always serial.
    int threads = 0;
};

// Reference implementation: per row, per tree, per subset pair (S, U) a
// separate marginalized tree walk. Serial; kept as the ground truth the fast
// path is tested against.
ComponentStore decompose_naive(const TreeEnsemble& ens, const Dataset& data,
                               const DecomposeOptions& opts = {});

// Fast path: one traversal per tree produces all 2^|T| marginal columns at
// once (see marginal_predict_all), then signed column sums form the
// components. Trees are processed in parallel; accumulation is serialized in
// tree order so results do not depend on the thread count.
ComponentStore decompose_fast(const TreeEnsemble& ens, const Dataset& data,
                              const DecomposeOptions& opts = {});

// Shared guard: throws guard_error when some tree's interaction order
// exceeds opts.max_interaction.
void check_interaction_cap(const TreeEnsemble& ens, int max_interaction);

}  // namespace glex
