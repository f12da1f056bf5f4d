#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glex/model.hpp"

namespace glex {

enum class Scenario { interaction2d, importance4d, salary };

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

struct SimSpec {
    Scenario scenario = Scenario::interaction2d;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    // interaction2d: correlation of the two standard-normal features.
    double corr = 0.3;
    // salary: standard deviation of weekly hours around the group mean.
    double hours_sd = 4.0;
};

struct SimData {
    Dataset x;
    std::vector<double> y;
};

// Deterministic draws:
//  - interaction2d: (x1, x2) standard normal with correlation `corr`,
//    y = x1 + x2 + 2*x1*x2 (no noise).
//  - importance4d: four independent standard normals,
//    y = x1 + x3 + x2*x3 - 2*x2*x3*x4.
//  - salary: sex alternates 0/1 per row; hours ~ Normal(30 + 10*sex,
//    hours_sd); y = hours + 20*sex.
SimData generate(const SimSpec& spec);

struct BoostParams {
    int rounds = 300;
    int max_depth = 2;
    double learning_rate = 0.1;
    int min_rows_per_leaf = 10;
};

// Least-squares gradient boosting with exact greedy splits (variance
// reduction), midpoint thresholds, le comparison rule, covers = row counts,
// base_offset = mean(y). Fully deterministic: ties break toward the lowest
// feature index, then the lowest threshold.
TreeEnsemble fit_gbt(const Dataset& data, std::span<const double> y, const BoostParams& params);

// fit_gbt on the dataset with the given columns dropped; the returned model
// is over the surviving columns (and their names), in order.
TreeEnsemble refit_without(const Dataset& data, std::span<const double> y,
                           const BoostParams& params, FeatureSet dropped);

Dataset drop_columns(const Dataset& data, FeatureSet dropped);

struct RandomEnsembleSpec {
    int d = 4;
    int n_trees = 10;
    int max_depth = 3;
    std::uint64_t seed = 1;
    ComparisonRule rule = ComparisonRule::less_than;
    // Probability that a non-root node stops early as a leaf.
    double leaf_prob = 0.3;
};

// Random valid ensemble for property tests and benchmarks: each tree draws a
// feature pool of at most max_depth features, splits on pool features with
// thresholds in (-2, 2), and distributes covers by random fractions, so
// every invariant checked by validate() holds and the interaction order of a
// tree never exceeds max_depth.
TreeEnsemble random_ensemble(const RandomEnsembleSpec& spec);

// n x d standard-normal dataset with columns f0..f{d-1}.
Dataset random_dataset(std::size_t n, int d, std::uint64_t seed);

}  // namespace glex
