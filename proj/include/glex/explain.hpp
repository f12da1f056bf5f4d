#pragma once

#include <span>
#include <vector>

#include "glex/decompose.hpp"
#include "glex/model.hpp"

namespace glex {

// Per-row interventional attributions: phi0 plus one value per feature, rows
// matching the ComponentStore they came from.
struct ShapMatrix {
    double phi0 = 0.0;
    std::size_t n_rows = 0;
    int d = 0;
    std::vector<double> values;  // n_rows * d, row-major

    double at(std::size_t i, int k) const { return values[i * static_cast<std::size_t>(d) + k]; }
};

// Attributions from a decomposition: every component is split equally among
// the features it involves, phi_k(x) = sum over S containing k of
// m_S(x) / |S|, and phi0 is the intercept. Summing phi0 and all phi_k of a
// row reproduces the prediction (efficiency).
ShapMatrix shap_from_components(const ComponentStore& store, int d);

struct ShapValues {
    double phi0 = 0.0;
    std::vector<double> phi;
};

// Definition-level attribution for one row: enumerates all 2^d feature
// subsets, scoring each by marginalizing the ensemble over its complement,
// and combines the weighted marginal contributions. O(2^d * ensemble);
// refuses d > max_d (guard_error). Agreement with shap_from_components is
// what the fast path is tested against.
ShapValues shap_bruteforce(const TreeEnsemble& ens, std::span<const double> x, int max_d = 20);

// Partial-dependence values of subset S at the store's rows:
// xi_S = intercept + sum over nonempty U ⊆ S of m_U. eval_coords holds x_S
// per row (ascending feature order) when a dataset is supplied.
struct PdpCurve {
    FeatureSet subset;
    std::vector<double> values;
    std::vector<double> eval_coords;  // n_rows * |S|, row-major; may be empty
};

PdpCurve pdp(const ComponentStore& store, FeatureSet s, const Dataset* coords = nullptr);

// Importance measures over the rows of the decomposition:
//  - shap:      mean |phi_k| per feature
//  - split:     mean of sum over S containing k of |m_S| / |S| per feature
//  - component: mean |m_S| per realized subset
// shap_importance[k] <= split_importance[k] always (triangle inequality).
struct ImportanceReport {
    std::vector<double> shap_importance;
    std::vector<double> split_importance;
    std::vector<std::pair<FeatureSet, double>> component_importance;
};

ImportanceReport importance(const ComponentStore& store, int d);

// The decomposition with every component touching `removed` dropped:
// the exact post-hoc model that no longer uses those features.
struct DebiasedModel {
    FeatureSet removed;
    ComponentStore store;

    std::vector<double> predictions() const;
};

DebiasedModel remove_features(const ComponentStore& store, FeatureSet removed);

}  // namespace glex
