#include "glex/decompose.hpp"

#include <algorithm>
#include <utility>

#include "glex/marginalize.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace glex {

void check_interaction_cap(const TreeEnsemble& ens, int max_interaction) {
    for (std::size_t t = 0; t < ens.trees.size(); ++t) {
        const int order = ens.trees[t].feature_set.count();
        if (order > max_interaction) {
            throw guard_error("tree " + std::to_string(t) + " interacts " + std::to_string(order) +
                              " features, above the cap of " + std::to_string(max_interaction) +
                              " (cost doubles per feature; set GLEX_MAX_DEPTH to raise the cap)");
        }
    }
}

ComponentStore decompose_naive(const TreeEnsemble& ens, const Dataset& data,
                               const DecomposeOptions& opts) {
    check_interaction_cap(ens, opts.max_interaction);
    ComponentStore store;
    store.n_rows = data.n;
    store.intercept = ens.base_offset;

    const std::vector<double> zeros(ens.d, 0.0);
    for (const Tree& tree : ens.trees) {
        const FeatureSet t_set = tree.feature_set;

        // Marginalizing over all of T ignores x, so the intercept term is a
        // constant; evaluate it once.
        const std::span<const double> x0 = data.n > 0 ? data.row(0) : std::span<const double>(zeros);
        store.intercept += marginal_predict(tree, ens.comparison_rule, t_set, x0);

        const int n_subsets = 1 << t_set.count();
        for (int rs = 1; rs < n_subsets; ++rs) {
            const FeatureSet s = FeatureSet::from_rank(rs, t_set);
            auto& vals = store.components.try_emplace(s, data.n, 0.0).first->second;
            const FeatureSet outside = t_set - s;
            for (std::size_t i = 0; i < data.n; ++i) {
                // m_S gets sign (-1)^|W| from each marginalization set
                // (T \ S) ∪ W over the subsets W ⊆ S.
                double acc = 0.0;
                for_each_subset_desc(s, [&](FeatureSet w) {
                    const double m =
                        marginal_predict(tree, ens.comparison_rule, outside | w, data.row(i));
                    acc += (w.count() & 1) ? -m : m;
                });
                vals[i] += acc;
            }
        }
    }
    return store;
}

namespace {

struct TreePartial {
    double intercept = 0.0;
    std::vector<std::pair<FeatureSet, std::vector<double>>> comps;
};

TreePartial tree_components(const Tree& tree, ComparisonRule rule, const Dataset& data,
                            std::span<const double> zeros) {
    const SubsetMatrix matrix = marginal_predict_all(tree, rule, data);
    const FeatureSet t_set = tree.feature_set;
    const int full = (1 << t_set.count()) - 1;
    const std::size_t n = data.n;

    TreePartial out;
    out.intercept = n > 0 ? matrix.column(full)[0] : marginal_predict(tree, rule, t_set, zeros);
    out.comps.reserve(full);
    for (int rs = 1; rs <= full; ++rs) {
        const FeatureSet s = FeatureSet::from_rank(rs, t_set);
        const FeatureSet outside = t_set - s;
        std::vector<double> vals(n, 0.0);
        for_each_subset_desc(s, [&](FeatureSet w) {
            const double* col = matrix.column((outside | w).rank_within(t_set));
            if (w.count() & 1) {
                for (std::size_t i = 0; i < n; ++i) vals[i] -= col[i];
            } else {
                for (std::size_t i = 0; i < n; ++i) vals[i] += col[i];
            }
        });
        out.comps.emplace_back(s, std::move(vals));
    }
    return out;
}

}  // namespace

ComponentStore decompose_fast(const TreeEnsemble& ens, const Dataset& data,
                              const DecomposeOptions& opts) {
    check_interaction_cap(ens, opts.max_interaction);
    ComponentStore store;
    store.n_rows = data.n;
    store.intercept = ens.base_offset;

    int threads = opts.threads;
#ifdef _OPENMP
    if (threads <= 0) threads = omp_get_max_threads();
#else
    threads = 1;
#endif

    const std::vector<double> zeros(ens.d, 0.0);
    const std::size_t n_trees = ens.trees.size();
    // Trees are expanded in parallel batches (bounding the live per-tree
    // matrices) and merged strictly in tree order, so the result is
    // independent of the thread count.
    const std::size_t batch = std::max<std::size_t>(1, static_cast<std::size_t>(threads) * 4);
    std::vector<TreePartial> parts;
    for (std::size_t start = 0; start < n_trees; start += batch) {
        const auto count = static_cast<std::int64_t>(std::min(batch, n_trees - start));
        parts.assign(static_cast<std::size_t>(count), TreePartial{});
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
        for (std::int64_t k = 0; k < count; ++k) {
            parts[k] = tree_components(ens.trees[start + k], ens.comparison_rule, data, zeros);
        }
        for (TreePartial& part : parts) {
            store.intercept += part.intercept;
            for (auto& [s, vals] : part.comps) {
                auto it = store.components.find(s);
                if (it == store.components.end()) {
                    store.components.emplace(s, std::move(vals));
                } else {
                    for (std::size_t i = 0; i < vals.size(); ++i) it->second[i] += vals[i];
                }
            }
        }
    }
    return store;
}

}  // namespace glex
