#pragma once

#include <map>
#include <vector>

#include "glex/decompose.hpp"
#include "glex/model.hpp"

namespace glex {

// Axis-aligned grid over feature space. axes[j] holds the sorted bottom-left
// cell corners of feature j: cell k is [corner_k, corner_{k+1}), the last
// cell is closed above at the data maximum. Features without an axis have no
// grid structure and may not appear in terms or densities.
struct Grid {
    int d = 0;
    std::vector<std::vector<double>> axes;

    std::size_t cells(int feature) const { return axes[feature].size(); }
    // Index of the cell containing v; throws validation_error below the grid.
    std::size_t locate(int feature, double v) const;
};

// One additive term of a grid model: a function of the features in
// `features`, tabulated per cell. Layout is row-major over the features in
// ascending index order, last feature fastest.
struct GridTerm {
    FeatureSet features;
    std::vector<double> values;
};

// A model of the form base_offset + (1/num_forests) * sum of terms.
// num_forests is 1 for additive ensembles (boosted trees); forest averages
// set it to the number of averaged replicates.
struct GridEnsemble {
    Grid grid;
    double base_offset = 0.0;
    int num_forests = 1;
    std::vector<GridTerm> terms;

    double predict(std::span<const double> x) const;
};

// Empirical cell probabilities per feature subset, same layout as GridTerm
// values. Marginal-consistent by construction when produced by
// estimate_density: summing out a feature of weights[U] yields weights[U'].
struct EmpiricalDensity {
    std::map<FeatureSet, std::vector<double>> weights;

    const std::vector<double>& at(FeatureSet u) const;
};

// Cell-count density of `data` on the grid for each requested subset.
// Duplicates in `subsets` are fine; the empty subset is always included.
EmpiricalDensity estimate_density(const Dataset& data, const Grid& grid,
                                  const std::vector<FeatureSet>& subsets);

// The decomposition of a grid model as grid functions: per realized subset S
// the component tabulated over the cells of S. Unlike the per-row
// ComponentStore this form can still be integrated against the density,
// which is what verify_identification needs.
struct GridComponentStore {
    double intercept = 0.0;
    std::map<FeatureSet, std::vector<double>> cell_values;
};

// Exact decomposition of a grid model under `density`: every term
// contributes, for each marginalization set U ⊆ T, its density-weighted
// average over the U cells to the components S between T \ U and T, with
// sign (-1)^{|S| - |T\U|}. Requires density entries for every U ⊆ T.
GridComponentStore decompose_grid_cells(const GridEnsemble& ens, const EmpiricalDensity& density);

// Per-row view of decompose_grid_cells at the rows of X.
ComponentStore decompose_grid(const GridEnsemble& ens, const EmpiricalDensity& density,
                              const Dataset& x);

// Residual of the identification constraint for subset S: the maximum over
// rows of | sum over realized T intersecting S of the density-weighted
// average of m_T over the cells of S (other coordinates pinned at the row) |.
// Exactly 0.0 for S = ∅; near zero (1e-10) for a store produced by
// decompose_grid_cells; order 1 when the store is perturbed.
double verify_identification(const GridEnsemble& ens, const GridComponentStore& store,
                             const EmpiricalDensity& density, FeatureSet s, const Dataset& x);

// Exact grid form of a tree ensemble: axes from the split thresholds (cell
// boundaries chosen so routing is constant per cell under the ensemble's
// comparison rule), one term per tree tabulated at the cell corners,
// num_forests = 1. `data` pins the axis origins at the column minima.
// Throws guard_error when the tabulation would exceed max_cells values.
GridEnsemble grid_from_ensemble(const TreeEnsemble& ens, const Dataset& data,
                                std::size_t max_cells = 100000000);

// Every subset needed to decompose `ens`: all subsets of each term's features.
std::vector<FeatureSet> density_subsets_for(const GridEnsemble& ens);

}  // namespace glex
