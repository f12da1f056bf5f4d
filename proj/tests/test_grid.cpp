#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "glex/grid.hpp"
#include "glex/rng.hpp"
#include "glex/synth.hpp"
#include "support.hpp"

using namespace glex;
using namespace glex::testing;

namespace {

// One binary axis at 0 for two features; four one-row quadrants.
GridEnsemble two_cell_model() {
    GridEnsemble ens;
    ens.grid.d = 1;
    ens.grid.axes = {{0.0, 1.0}};
    ens.terms.push_back({FeatureSet::single(0), {1.0, 3.0}});
    return ens;
}

Dataset two_cell_data() {
    return make_dataset({"f0"}, {{0.2}, {0.5}, {1.5}, {1.7}});
}

}  // namespace

TEST_CASE("cell location") {
    Grid grid;
    grid.d = 1;
    grid.axes = {{0.0, 1.0, 2.5}};
    CHECK(grid.locate(0, 0.0) == 0);
    CHECK(grid.locate(0, 0.99) == 0);
    CHECK(grid.locate(0, 1.0) == 1);
    CHECK(grid.locate(0, 2.5) == 2);
    CHECK(grid.locate(0, 99.0) == 2);  // last cell is closed above
    CHECK_THROWS_AS((void)grid.locate(0, -0.1), validation_error);
}

TEST_CASE("density of four points on two cells") {
    const GridEnsemble ens = two_cell_model();
    const EmpiricalDensity density =
        estimate_density(two_cell_data(), ens.grid, {FeatureSet::single(0)});
    CHECK(density.at(FeatureSet()) == std::vector<double>{1.0});
    CHECK(density.at(FeatureSet::single(0)) == std::vector<double>{0.5, 0.5});
    CHECK_THROWS_AS((void)density.at(FeatureSet::single(3)), validation_error);
}

TEST_CASE("joint density and marginal consistency") {
    Grid grid;
    grid.d = 2;
    grid.axes = {{-1.0, 0.0}, {-1.0, 0.0}};
    Rng rng(99);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 256; ++i) {
        rows.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    }
    const Dataset data = make_dataset({"f0", "f1"}, rows);
    const FeatureSet joint = FeatureSet::of({0, 1});
    const EmpiricalDensity density =
        estimate_density(data, grid, {joint, FeatureSet::single(0), FeatureSet::single(1)});

    const auto& pj = density.at(joint);
    const auto& p0 = density.at(FeatureSet::single(0));
    const auto& p1 = density.at(FeatureSet::single(1));
    REQUIRE(pj.size() == 4);
    double total = 0.0;
    for (double p : pj) {
        CHECK(p >= 0.0);
        total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // layout: f1 varies fastest
    CHECK(pj[0] + pj[1] == doctest::Approx(p0[0]).epsilon(1e-12));
    CHECK(pj[2] + pj[3] == doctest::Approx(p0[1]).epsilon(1e-12));
    CHECK(pj[0] + pj[2] == doctest::Approx(p1[0]).epsilon(1e-12));
    CHECK(pj[1] + pj[3] == doctest::Approx(p1[1]).epsilon(1e-12));
}

TEST_CASE("cell frequencies converge to the sampling law") {
    Grid grid;
    grid.d = 2;
    grid.axes.resize(2);
    for (int k = 0; k < 10; ++k) {
        grid.axes[0].push_back(k / 10.0);
        grid.axes[1].push_back(k / 10.0);
    }
    const std::size_t n = 1000000;
    Rng rng(7);
    Dataset data;
    data.n = n;
    data.d = 2;
    data.column_names = {"f0", "f1"};
    data.values.resize(n * 2);
    for (double& v : data.values) v = rng.uniform();

    const FeatureSet joint = FeatureSet::of({0, 1});
    const EmpiricalDensity density = estimate_density(data, grid, {joint});
    for (double p : density.at(joint)) CHECK(std::abs(p - 0.01) <= 0.002);
}

TEST_CASE("empty dataset cannot define a density") {
    Dataset data;
    data.d = 1;
    data.column_names = {"f0"};
    CHECK_THROWS_AS((void)estimate_density(data, two_cell_model().grid, {FeatureSet::single(0)}),
                    validation_error);
}

TEST_CASE("grid decomposition of the two-cell model") {
    const GridEnsemble ens = two_cell_model();
    const Dataset data = two_cell_data();
    const EmpiricalDensity density = estimate_density(data, ens.grid, density_subsets_for(ens));

    const GridComponentStore cells = decompose_grid_cells(ens, density);
    CHECK(cells.intercept == doctest::Approx(2.0).epsilon(1e-15));
    REQUIRE(cells.cell_values.size() == 1);
    const auto& m0 = cells.cell_values.at(FeatureSet::single(0));
    CHECK(m0 == std::vector<double>{-1.0, 1.0});

    const ComponentStore store = decompose_grid(ens, density, data);
    CHECK(store.intercept == doctest::Approx(2.0).epsilon(1e-15));
    const auto& rows = store.components.at(FeatureSet::single(0));
    CHECK(rows == std::vector<double>{-1.0, -1.0, 1.0, 1.0});
    for (std::size_t i = 0; i < data.n; ++i) {
        CHECK(store_row_sum(store, i) ==
              doctest::Approx(ens.predict(data.row(i))).epsilon(1e-12));
    }
}

TEST_CASE("constant term decomposes to a pure intercept") {
    GridEnsemble ens;
    ens.grid.d = 1;
    ens.grid.axes = {{0.0}};
    ens.terms.push_back({FeatureSet::single(0), {3.0}});
    const Dataset data = make_dataset({"f0"}, {{0.5}});
    const EmpiricalDensity density = estimate_density(data, ens.grid, density_subsets_for(ens));
    const GridComponentStore cells = decompose_grid_cells(ens, density);
    CHECK(cells.intercept == 3.0);
    for (const auto& [s, vals] : cells.cell_values) {
        for (double v : vals) CHECK(v == 0.0);
    }
}

TEST_CASE("num_forests averages replicated terms") {
    GridEnsemble ens = two_cell_model();
    ens.terms.push_back(ens.terms[0]);
    ens.num_forests = 2;
    const Dataset data = two_cell_data();
    const EmpiricalDensity density = estimate_density(data, ens.grid, density_subsets_for(ens));
    const GridComponentStore cells = decompose_grid_cells(ens, density);
    CHECK(cells.intercept == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(cells.cell_values.at(FeatureSet::single(0)) == std::vector<double>{-1.0, 1.0});
}

TEST_CASE("identification residuals") {
    const GridEnsemble ens = two_cell_model();
    const Dataset data = two_cell_data();
    const EmpiricalDensity density = estimate_density(data, ens.grid, density_subsets_for(ens));
    GridComponentStore cells = decompose_grid_cells(ens, density);

    CHECK(verify_identification(ens, cells, density, FeatureSet(), data) == 0.0);
    CHECK(verify_identification(ens, cells, density, FeatureSet::single(0), data) <= 1e-10);

    // Moving mass from the component into the intercept keeps predictions
    // intact but breaks identification by exactly that mass.
    cells.intercept += 1.0;
    for (double& v : cells.cell_values.at(FeatureSet::single(0))) v -= 1.0;
    CHECK(verify_identification(ens, cells, density, FeatureSet::single(0), data) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("identification holds for a fitted-style two-feature model") {
    // depth-2 fixture converted to grid form; quadrant data matches covers
    const TreeEnsemble trees = depth2_ensemble();
    const Dataset data = quadrant_dataset();
    const GridEnsemble ens = grid_from_ensemble(trees, data);
    const EmpiricalDensity density = estimate_density(data, ens.grid, density_subsets_for(ens));
    const GridComponentStore cells = decompose_grid_cells(ens, density);
    for (const std::uint64_t mask : {1ull, 2ull, 3ull}) {
        CHECK(verify_identification(ens, cells, density, FeatureSet(mask), data) <= 1e-10);
    }
}

TEST_CASE("grid form agrees with the tree decomposition when covers match counts") {
    TreeEnsemble trees = depth2_ensemble();
    {
        // extra trees keep covers proportional to the quadrant counts
        Tree t0;
        t0.root = 0;
        t0.nodes.resize(3);
        t0.nodes[0] = {1, 2, 0, 0.0, 0.0, 100.0};
        t0.nodes[1] = {-1, -1, -1, 0.0, -1.0, 50.0};
        t0.nodes[2] = {-1, -1, -1, 0.0, 1.0, 50.0};
        t0.finalize_feature_set();
        trees.trees.push_back(t0);
        Tree leaf;
        leaf.root = 0;
        leaf.nodes.resize(1);
        leaf.nodes[0].value = 0.7;
        leaf.nodes[0].cover = 100.0;
        leaf.finalize_feature_set();
        trees.trees.push_back(leaf);
        trees.base_offset = 0.25;
    }
    REQUIRE(validate(trees).empty());
    const Dataset data = quadrant_dataset();

    const GridEnsemble grid_model = grid_from_ensemble(trees, data);
    for (std::size_t i = 0; i < data.n; ++i) {
        CHECK(grid_model.predict(data.row(i)) ==
              doctest::Approx(predict(trees, data.row(i))).epsilon(1e-12));
    }

    const EmpiricalDensity density =
        estimate_density(data, grid_model.grid, density_subsets_for(grid_model));
    const ComponentStore via_grid = decompose_grid(grid_model, density, data);
    const ComponentStore via_trees = decompose_naive(trees, data);
    CHECK(store_distance(via_grid, via_trees) <= 1e-10);
}

TEST_CASE("grid conversion respects the le comparison rule") {
    TreeEnsemble trees = depth2_ensemble();
    trees.comparison_rule = ComparisonRule::less_or_equal;
    const Dataset data = quadrant_dataset();
    const GridEnsemble grid_model = grid_from_ensemble(trees, data);
    for (std::size_t i = 0; i < data.n; ++i) {
        CHECK(grid_model.predict(data.row(i)) == predict(trees, data.row(i)));
    }
    // boundary value: 0 routes left under le, and the grid must agree
    const std::vector<double> boundary = {0.0, 0.0};
    CHECK(grid_model.predict(boundary) == predict(trees, boundary));
}

TEST_CASE("grid error paths") {
    const GridEnsemble ens = two_cell_model();
    const Dataset data = two_cell_data();
    SUBCASE("missing density subset") {
        EmpiricalDensity density;
        density.weights.emplace(FeatureSet(), std::vector<double>{1.0});
        CHECK_THROWS_AS((void)decompose_grid_cells(ens, density), validation_error);
    }
    SUBCASE("density extent mismatch") {
        EmpiricalDensity density;
        density.weights.emplace(FeatureSet(), std::vector<double>{1.0});
        density.weights.emplace(FeatureSet::single(0), std::vector<double>{0.5, 0.3, 0.2});
        CHECK_THROWS_AS((void)decompose_grid_cells(ens, density), validation_error);
    }
    SUBCASE("term extent mismatch") {
        GridEnsemble broken = ens;
        broken.terms[0].values.push_back(0.0);
        const EmpiricalDensity density =
            estimate_density(data, ens.grid, density_subsets_for(ens));
        CHECK_THROWS_AS((void)decompose_grid_cells(broken, density), validation_error);
    }
    SUBCASE("term on a feature without an axis") {
        GridEnsemble broken = ens;
        broken.grid.d = 2;
        broken.grid.axes.push_back({});
        broken.terms[0].features = FeatureSet::single(1);
        EmpiricalDensity density;
        CHECK_THROWS_AS((void)decompose_grid_cells(broken, density), validation_error);
    }
    SUBCASE("cell-count guard") {
        const TreeEnsemble trees = depth2_ensemble();
        CHECK_THROWS_AS((void)grid_from_ensemble(trees, quadrant_dataset(), 3), guard_error);
    }
}
