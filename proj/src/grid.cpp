#include "glex/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace glex {

namespace {

std::string subset_name(FeatureSet s) {
    if (s.empty()) return "{}";
    std::string out = "{";
    bool first = true;
    for (int j : s.indices()) {
        if (!first) out += ",";
        out += std::to_string(j);
        first = false;
    }
    return out + "}";
}

// Shape of the cell tabulation for a feature subset: ascending features,
// last one fastest.
struct CellLayout {
    std::vector<int> feats;
    std::vector<std::size_t> extents;
    std::size_t total = 1;
};

CellLayout make_layout(const Grid& grid, FeatureSet f) {
    CellLayout out;
    out.feats = f.indices();
    for (int j : out.feats) {
        if (j >= grid.d || grid.axes[j].empty()) {
            throw validation_error("feature " + std::to_string(j) + " has no grid axis");
        }
        out.extents.push_back(grid.cells(j));
        out.total *= grid.cells(j);
    }
    return out;
}

// Writes the cell digits of `flat` into a per-feature buffer (size d).
void unflatten(const CellLayout& layout, std::size_t flat, std::vector<std::size_t>& by_feature) {
    for (std::size_t k = layout.feats.size(); k-- > 0;) {
        by_feature[layout.feats[k]] = flat % layout.extents[k];
        flat /= layout.extents[k];
    }
}

std::size_t flatten(const CellLayout& layout, const std::vector<std::size_t>& by_feature) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < layout.feats.size(); ++k) {
        idx = idx * layout.extents[k] + by_feature[layout.feats[k]];
    }
    return idx;
}

const std::vector<double>& density_entry(const EmpiricalDensity& density, FeatureSet u,
                                         const CellLayout& layout) {
    const std::vector<double>& w = density.at(u);
    if (w.size() != layout.total) {
        throw validation_error("density entry for subset " + subset_name(u) + " has " +
                               std::to_string(w.size()) + " cells, expected " +
                               std::to_string(layout.total));
    }
    return w;
}

}  // namespace

std::size_t Grid::locate(int feature, double v) const {
    const std::vector<double>& axis = axes[feature];
    if (axis.empty()) throw validation_error("feature " + std::to_string(feature) + " has no grid axis");
    if (v < axis.front()) {
        throw validation_error("value " + std::to_string(v) + " of feature " +
                               std::to_string(feature) + " lies below the grid");
    }
    const auto it = std::upper_bound(axis.begin(), axis.end(), v);
    return static_cast<std::size_t>(it - axis.begin()) - 1;
}

double GridEnsemble::predict(std::span<const double> x) const {
    double acc = 0.0;
    std::vector<std::size_t> by_feature(static_cast<std::size_t>(grid.d), 0);
    for (const GridTerm& term : terms) {
        const CellLayout layout = make_layout(grid, term.features);
        for (int j : layout.feats) by_feature[j] = grid.locate(j, x[j]);
        acc += term.values[flatten(layout, by_feature)];
    }
    return base_offset + acc / num_forests;
}

const std::vector<double>& EmpiricalDensity::at(FeatureSet u) const {
    const auto it = weights.find(u);
    if (it == weights.end()) {
        throw validation_error("density has no entry for subset " + subset_name(u));
    }
    return it->second;
}

EmpiricalDensity estimate_density(const Dataset& data, const Grid& grid,
                                  const std::vector<FeatureSet>& subsets) {
    if (data.n == 0) throw validation_error("cannot estimate a density from an empty dataset");

    std::set<FeatureSet> wanted(subsets.begin(), subsets.end());
    wanted.insert(FeatureSet());

    FeatureSet used;
    for (FeatureSet s : wanted) used = used | s;
    // Cell index of every row for every referenced feature, computed once.
    std::vector<std::vector<std::size_t>> cell_of(static_cast<std::size_t>(grid.d));
    for (int j : used.indices()) {
        cell_of[j].resize(data.n);
        for (std::size_t i = 0; i < data.n; ++i) cell_of[j][i] = grid.locate(j, data.at(i, j));
    }

    EmpiricalDensity density;
    std::vector<std::size_t> by_feature(static_cast<std::size_t>(grid.d), 0);
    for (FeatureSet s : wanted) {
        const CellLayout layout = make_layout(grid, s);
        std::vector<double> counts(layout.total, 0.0);
        for (std::size_t i = 0; i < data.n; ++i) {
            for (int j : layout.feats) by_feature[j] = cell_of[j][i];
            counts[flatten(layout, by_feature)] += 1.0;
        }
        for (double& c : counts) c /= static_cast<double>(data.n);
        density.weights.emplace(s, std::move(counts));
    }
    return density;
}

GridComponentStore decompose_grid_cells(const GridEnsemble& ens, const EmpiricalDensity& density) {
    GridComponentStore store;
    double intercept_acc = 0.0;
    std::vector<std::size_t> by_feature(static_cast<std::size_t>(ens.grid.d), 0);

    for (std::size_t ti = 0; ti < ens.terms.size(); ++ti) {
        const GridTerm& term = ens.terms[ti];
        const CellLayout full = make_layout(ens.grid, term.features);
        if (term.values.size() != full.total) {
            throw validation_error("grid term " + std::to_string(ti) + " has " +
                                   std::to_string(term.values.size()) + " values, expected " +
                                   std::to_string(full.total));
        }

        const int n_subsets = 1 << term.features.count();
        for (int ru = 0; ru < n_subsets; ++ru) {
            const FeatureSet u = FeatureSet::from_rank(ru, term.features);
            const FeatureSet rest = term.features - u;
            const CellLayout layout_u = make_layout(ens.grid, u);
            const CellLayout layout_rest = make_layout(ens.grid, rest);
            const std::vector<double>& w = density_entry(density, u, layout_u);

            // Density-weighted average of the term over the U cells, kept as
            // a function on the remaining cells.
            std::vector<double> averaged(layout_rest.total, 0.0);
            for (std::size_t flat = 0; flat < full.total; ++flat) {
                unflatten(full, flat, by_feature);
                averaged[flatten(layout_rest, by_feature)] +=
                    term.values[flat] * w[flatten(layout_u, by_feature)];
            }

            // The average lands on every component between T \ U and T.
            for_each_subset_desc(u, [&](FeatureSet w_set) {
                const FeatureSet s = rest | w_set;
                const double sign = (w_set.count() & 1) ? -1.0 : 1.0;
                if (s.empty()) {
                    intercept_acc += sign * averaged[0];
                    return;
                }
                const CellLayout layout_s = make_layout(ens.grid, s);
                auto& comp =
                    store.cell_values.try_emplace(s, layout_s.total, 0.0).first->second;
                for (std::size_t flat = 0; flat < layout_s.total; ++flat) {
                    unflatten(layout_s, flat, by_feature);
                    comp[flat] += sign * averaged[flatten(layout_rest, by_feature)];
                }
            });
        }
    }

    const auto b = static_cast<double>(ens.num_forests);
    store.intercept = ens.base_offset + intercept_acc / b;
    for (auto& [s, vals] : store.cell_values) {
        for (double& v : vals) v /= b;
    }
    return store;
}

ComponentStore decompose_grid(const GridEnsemble& ens, const EmpiricalDensity& density,
                              const Dataset& x) {
    const GridComponentStore cells = decompose_grid_cells(ens, density);

    ComponentStore store;
    store.intercept = cells.intercept;
    store.n_rows = x.n;

    FeatureSet used;
    for (const auto& [s, vals] : cells.cell_values) used = used | s;
    std::vector<std::vector<std::size_t>> cell_of(static_cast<std::size_t>(ens.grid.d));
    for (int j : used.indices()) {
        cell_of[j].resize(x.n);
        for (std::size_t i = 0; i < x.n; ++i) cell_of[j][i] = ens.grid.locate(j, x.at(i, j));
    }

    std::vector<std::size_t> by_feature(static_cast<std::size_t>(ens.grid.d), 0);
    for (const auto& [s, vals] : cells.cell_values) {
        const CellLayout layout = make_layout(ens.grid, s);
        std::vector<double> rows(x.n, 0.0);
        for (std::size_t i = 0; i < x.n; ++i) {
            for (int j : layout.feats) by_feature[j] = cell_of[j][i];
            rows[i] = vals[flatten(layout, by_feature)];
        }
        store.components.emplace(s, std::move(rows));
    }
    return store;
}

double verify_identification(const GridEnsemble& ens, const GridComponentStore& store,
                             const EmpiricalDensity& density, FeatureSet s, const Dataset& x) {
    if (s.empty() || x.n == 0) return 0.0;

    std::vector<double> residual(x.n, 0.0);
    std::vector<std::size_t> by_feature(static_cast<std::size_t>(ens.grid.d), 0);

    for (const auto& [t_set, vals] : store.cell_values) {
        if (!t_set.intersects(s)) continue;
        const FeatureSet overlap = t_set & s;
        const FeatureSet rest = t_set - s;
        const CellLayout layout_t = make_layout(ens.grid, t_set);
        const CellLayout layout_overlap = make_layout(ens.grid, overlap);
        const std::vector<double>& w = density_entry(density, overlap, layout_overlap);

        for (std::size_t i = 0; i < x.n; ++i) {
            for (int j : rest.indices()) by_feature[j] = ens.grid.locate(j, x.at(i, j));
            double acc = 0.0;
            for (std::size_t u = 0; u < layout_overlap.total; ++u) {
                unflatten(layout_overlap, u, by_feature);
                acc += vals[flatten(layout_t, by_feature)] * w[u];
            }
            residual[i] += acc;
        }
    }

    double worst = 0.0;
    for (double r : residual) worst = std::max(worst, std::abs(r));
    return worst;
}

GridEnsemble grid_from_ensemble(const TreeEnsemble& ens, const Dataset& data,
                                std::size_t max_cells) {
    if (data.n == 0) throw validation_error("cannot build a grid without data");
    if (static_cast<int>(data.d) != ens.d) {
        throw validation_error("dataset has " + std::to_string(data.d) +
                               " columns but the model expects " + std::to_string(ens.d));
    }

    GridEnsemble out;
    out.grid.d = ens.d;
    out.grid.axes.resize(static_cast<std::size_t>(ens.d));
    out.base_offset = ens.base_offset;
    out.num_forests = 1;

    for (int j = 0; j < ens.d; ++j) {
        double lo = data.at(0, j);
        double hi = data.at(0, j);
        for (std::size_t i = 1; i < data.n; ++i) {
            lo = std::min(lo, data.at(i, j));
            hi = std::max(hi, data.at(i, j));
        }
        // A split at threshold t separates cells at t ("lt") or just above t
        // ("le"); either way routing is constant inside every cell and the
        // bottom-left corner routes like the whole cell.
        std::set<double> corners;
        corners.insert(lo);
        for (const Tree& tree : ens.trees) {
            for (const TreeNode& node : tree.nodes) {
                if (node.is_leaf() || node.feature != j) continue;
                const double boundary = ens.comparison_rule == ComparisonRule::less_than
                                            ? node.threshold
                                            : std::nextafter(node.threshold, std::numeric_limits<double>::infinity());
                if (boundary > lo && boundary <= hi) corners.insert(boundary);
            }
        }
        out.grid.axes[j].assign(corners.begin(), corners.end());
    }

    std::size_t total_cells = 0;
    for (const Tree& tree : ens.trees) {
        const CellLayout layout = make_layout(out.grid, tree.feature_set);
        total_cells += layout.total;
        if (total_cells > max_cells) {
            throw guard_error("grid tabulation needs more than " + std::to_string(max_cells) +
                              " cells; use the tree-based algorithms instead");
        }
    }

    std::vector<std::size_t> by_feature(static_cast<std::size_t>(ens.d), 0);
    std::vector<double> point(static_cast<std::size_t>(ens.d), 0.0);
    for (const Tree& tree : ens.trees) {
        GridTerm term;
        term.features = tree.feature_set;
        const CellLayout layout = make_layout(out.grid, term.features);
        term.values.resize(layout.total);
        for (std::size_t flat = 0; flat < layout.total; ++flat) {
            unflatten(layout, flat, by_feature);
            for (int j : layout.feats) point[j] = out.grid.axes[j][by_feature[j]];
            term.values[flat] = predict_tree(tree, ens.comparison_rule, point);
        }
        out.terms.push_back(std::move(term));
    }
    return out;
}

std::vector<FeatureSet> density_subsets_for(const GridEnsemble& ens) {
    std::set<FeatureSet> out;
    out.insert(FeatureSet());
    for (const GridTerm& term : ens.terms) {
        const int n_subsets = 1 << term.features.count();
        for (int r = 0; r < n_subsets; ++r) out.insert(FeatureSet::from_rank(r, term.features));
    }
    return {out.begin(), out.end()};
}

}  // namespace glex
