#include "glex/explain.hpp"

#include <cmath>

#include "glex/marginalize.hpp"

namespace glex {

ShapMatrix shap_from_components(const ComponentStore& store, int d) {
    ShapMatrix out;
    out.phi0 = store.intercept;
    out.n_rows = store.n_rows;
    out.d = d;
    out.values.assign(store.n_rows * static_cast<std::size_t>(d), 0.0);
    for (const auto& [s, vals] : store.components) {
        const double share = 1.0 / s.count();
        for (int k : s.indices()) {
            for (std::size_t i = 0; i < store.n_rows; ++i) {
                out.values[i * static_cast<std::size_t>(d) + k] += vals[i] * share;
            }
        }
    }
    return out;
}

ShapValues shap_bruteforce(const TreeEnsemble& ens, std::span<const double> x, int max_d) {
    const int d = ens.d;
    if (d > max_d) {
        throw guard_error("exact attribution enumerates 2^" + std::to_string(d) +
                          " feature subsets; refusing d > " + std::to_string(max_d));
    }

    // Value of every coalition: features outside the coalition are averaged
    // out of each tree.
    const std::size_t n_subsets = std::size_t(1) << d;
    std::vector<double> value(n_subsets);
    for (std::size_t mask = 0; mask < n_subsets; ++mask) {
        const FeatureSet coalition(mask);
        double v = ens.base_offset;
        for (const Tree& tree : ens.trees) {
            v += marginal_predict(tree, ens.comparison_rule, tree.feature_set - coalition, x);
        }
        value[mask] = v;
    }

    // weight[s] = s! (d-s-1)! / d!, built by recurrence to stay exact longer.
    std::vector<double> weight(static_cast<std::size_t>(d));
    weight[0] = 1.0 / d;
    for (int s = 1; s < d; ++s) {
        weight[s] = weight[s - 1] * s / (d - s);
    }

    ShapValues out;
    out.phi0 = value[0];
    out.phi.assign(static_cast<std::size_t>(d), 0.0);
    for (int k = 0; k < d; ++k) {
        const std::uint64_t bit = std::uint64_t(1) << k;
        double phi = 0.0;
        for (std::size_t mask = 0; mask < n_subsets; ++mask) {
            if (mask & bit) continue;
            phi += weight[std::popcount(mask)] * (value[mask | bit] - value[mask]);
        }
        out.phi[k] = phi;
    }
    return out;
}

PdpCurve pdp(const ComponentStore& store, FeatureSet s, const Dataset* coords) {
    PdpCurve out;
    out.subset = s;
    out.values.assign(store.n_rows, store.intercept);
    for (const auto& [u, vals] : store.components) {
        if (!u.is_subset_of(s)) continue;
        for (std::size_t i = 0; i < store.n_rows; ++i) out.values[i] += vals[i];
    }
    if (coords != nullptr) {
        const std::vector<int> feats = s.indices();
        out.eval_coords.reserve(store.n_rows * feats.size());
        for (std::size_t i = 0; i < store.n_rows; ++i) {
            for (int j : feats) out.eval_coords.push_back(coords->at(i, j));
        }
    }
    return out;
}

ImportanceReport importance(const ComponentStore& store, int d) {
    ImportanceReport out;
    out.shap_importance.assign(static_cast<std::size_t>(d), 0.0);
    out.split_importance.assign(static_cast<std::size_t>(d), 0.0);
    if (store.n_rows == 0) {
        for (const auto& [s, vals] : store.components) out.component_importance.emplace_back(s, 0.0);
        return out;
    }
    const double inv_n = 1.0 / static_cast<double>(store.n_rows);

    const ShapMatrix shap = shap_from_components(store, d);
    for (int k = 0; k < d; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < store.n_rows; ++i) acc += std::abs(shap.at(i, k));
        out.shap_importance[k] = acc * inv_n;
    }

    for (const auto& [s, vals] : store.components) {
        double acc = 0.0;
        for (double v : vals) acc += std::abs(v);
        const double mean_abs = acc * inv_n;
        out.component_importance.emplace_back(s, mean_abs);
        const double share = mean_abs / s.count();
        for (int k : s.indices()) out.split_importance[k] += share;
    }
    return out;
}

std::vector<double> DebiasedModel::predictions() const {
    std::vector<double> out(store.n_rows, store.intercept);
    for (const auto& [s, vals] : store.components) {
        for (std::size_t i = 0; i < store.n_rows; ++i) out[i] += vals[i];
    }
    return out;
}

DebiasedModel remove_features(const ComponentStore& store, FeatureSet removed) {
    DebiasedModel out;
    out.removed = removed;
    out.store.intercept = store.intercept;
    out.store.n_rows = store.n_rows;
    for (const auto& [s, vals] : store.components) {
        if (s.intersects(removed)) continue;
        out.store.components.emplace(s, vals);
    }
    return out;
}

}  // namespace glex
