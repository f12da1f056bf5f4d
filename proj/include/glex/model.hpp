#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "glex/feature_set.hpp"

namespace glex {

// Thrown when a resource guard refuses an operation (interaction-order cap,
// exact-attribution dimension cap). The CLI maps this to exit code 2.
struct guard_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input documents (JSON/CSV that cannot be understood).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally parseable input that violates a model/data invariant.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// How a split routes a value equal to the threshold. less_than ("lt") sends
// x < t left; less_or_equal ("le") sends x <= t left.
enum class ComparisonRule { less_than, less_or_equal };

std::string to_string(ComparisonRule rule);
ComparisonRule comparison_rule_from_string(const std::string& s);

inline bool goes_left(ComparisonRule rule, double x, double threshold) {
    return rule == ComparisonRule::less_than ? x < threshold : x <= threshold;
}

// One node of a binary decision tree. Leaves have left == right == -1 and
// carry `value`; internal nodes carry a split and child indices. `cover` is
// the training-weight mass that reached the node.
struct TreeNode {
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t feature = -1;
    double threshold = 0.0;
    double value = 0.0;
    double cover = 0.0;

    bool is_leaf() const { return left < 0; }
};

struct Tree {
    std::int32_t root = 0;
    std::vector<TreeNode> nodes;
    // Union of split features; filled by finalize_feature_set / the loaders.
    FeatureSet feature_set;

    void finalize_feature_set();
};

struct TreeEnsemble {
    int d = 0;
    std::vector<std::string> feature_names;
    double base_offset = 0.0;
    ComparisonRule comparison_rule = ComparisonRule::less_than;
    std::vector<Tree> trees;
};

// In-memory numeric table, row-major.
struct Dataset {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<std::string> column_names;
    std::vector<double> values;  // n * d, row-major

    double at(std::size_t i, std::size_t j) const { return values[i * d + j]; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * d, d}; }

    int column_index(const std::string& name) const;  // -1 when absent
};

// Route a single tree to its leaf value.
double predict_tree(const Tree& tree, ComparisonRule rule, std::span<const double> x);

// base_offset plus the sum of the tree predictions, in tree order.
double predict(const TreeEnsemble& ens, std::span<const double> x);
std::vector<double> predict(const TreeEnsemble& ens, const Dataset& data);

// Structural checks: child indices form a tree, covers are positive and
// children sum to the parent (relative tolerance 1e-6), split features lie in
// [0, d), feature_set matches the splits. Returns human-readable violations,
// empty when the ensemble is well-formed.
std::vector<std::string> validate(const TreeEnsemble& ens);

// FNV-1a hash of the canonical serialized form, as fixed-width hex.
std::string model_hash(const TreeEnsemble& ens);

}  // namespace glex
