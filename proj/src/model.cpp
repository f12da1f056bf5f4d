#include "glex/model.hpp"

#include <cmath>
#include <cstdio>

#include "glex/model_io.hpp"

namespace glex {

std::string to_string(ComparisonRule rule) {
    return rule == ComparisonRule::less_than ? "lt" : "le";
}

ComparisonRule comparison_rule_from_string(const std::string& s) {
    if (s == "lt") return ComparisonRule::less_than;
    if (s == "le") return ComparisonRule::less_or_equal;
    throw parse_error("unknown comparison rule \"" + s + "\" (expected \"lt\" or \"le\")");
}

void Tree::finalize_feature_set() {
    FeatureSet fs;
    for (const TreeNode& node : nodes) {
        // Out-of-range features cannot be represented in the mask; validate()
        // reports them, so skip here rather than shifting out of range.
        if (!node.is_leaf() && node.feature >= 0 && node.feature < 64) fs = fs.with(node.feature);
    }
    feature_set = fs;
}

int Dataset::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < column_names.size(); ++j) {
        if (column_names[j] == name) return static_cast<int>(j);
    }
    return -1;
}

double predict_tree(const Tree& tree, ComparisonRule rule, std::span<const double> x) {
    std::int32_t id = tree.root;
    while (!tree.nodes[id].is_leaf()) {
        const TreeNode& node = tree.nodes[id];
        id = goes_left(rule, x[node.feature], node.threshold) ? node.left : node.right;
    }
    return tree.nodes[id].value;
}

double predict(const TreeEnsemble& ens, std::span<const double> x) {
    if (static_cast<int>(x.size()) != ens.d) {
        throw validation_error("prediction input has " + std::to_string(x.size()) +
                               " values but the model expects " + std::to_string(ens.d));
    }
    double out = ens.base_offset;
    for (const Tree& tree : ens.trees) out += predict_tree(tree, ens.comparison_rule, x);
    return out;
}

std::vector<double> predict(const TreeEnsemble& ens, const Dataset& data) {
    if (static_cast<int>(data.d) != ens.d) {
        throw validation_error("dataset has " + std::to_string(data.d) +
                               " columns but the model expects " + std::to_string(ens.d));
    }
    std::vector<double> out(data.n);
    for (std::size_t i = 0; i < data.n; ++i) out[i] = predict(ens, data.row(i));
    return out;
}

namespace {

void check_tree(const TreeEnsemble& ens, std::size_t t, std::vector<std::string>& out) {
    const Tree& tree = ens.trees[t];
    const auto n_nodes = static_cast<std::int32_t>(tree.nodes.size());
    auto tag = [&](std::int32_t id) {
        return "tree " + std::to_string(t) + " node " + std::to_string(id);
    };

    if (tree.nodes.empty()) {
        out.push_back("tree " + std::to_string(t) + " has no nodes");
        return;
    }
    if (tree.root < 0 || tree.root >= n_nodes) {
        out.push_back("tree " + std::to_string(t) + " root index " + std::to_string(tree.root) +
                      " out of range");
        return;
    }

    // Walk from the root; every node must be reached exactly once.
    std::vector<char> seen(tree.nodes.size(), 0);
    std::vector<std::int32_t> stack = {tree.root};
    bool structure_ok = true;
    while (!stack.empty()) {
        std::int32_t id = stack.back();
        stack.pop_back();
        if (seen[id]) {
            out.push_back(tag(id) + " is reachable twice (cycle or shared subtree)");
            structure_ok = false;
            break;
        }
        seen[id] = 1;
        const TreeNode& node = tree.nodes[id];
        if (node.is_leaf()) continue;
        for (std::int32_t child : {node.left, node.right}) {
            if (child < 0 || child >= n_nodes) {
                out.push_back(tag(id) + " child index " + std::to_string(child) + " out of range");
                structure_ok = false;
            } else {
                stack.push_back(child);
            }
        }
        if (!structure_ok) break;
    }
    if (!structure_ok) return;
    for (std::int32_t id = 0; id < n_nodes; ++id) {
        if (!seen[id]) out.push_back(tag(id) + " is not reachable from the root");
    }

    FeatureSet fs;
    for (std::int32_t id = 0; id < n_nodes; ++id) {
        const TreeNode& node = tree.nodes[id];
        if (!std::isfinite(node.cover) || node.cover <= 0.0) {
            out.push_back(tag(id) + " has non-positive cover");
            continue;
        }
        if (node.is_leaf()) {
            if (!std::isfinite(node.value)) out.push_back(tag(id) + " has non-finite leaf value");
            continue;
        }
        if (node.feature < 0 || node.feature >= ens.d) {
            out.push_back(tag(id) + " splits feature " + std::to_string(node.feature) +
                          ", outside [0, " + std::to_string(ens.d) + ")");
        } else {
            fs = fs.with(node.feature);
        }
        if (!std::isfinite(node.threshold)) out.push_back(tag(id) + " has non-finite threshold");
        const double child_sum = tree.nodes[node.left].cover + tree.nodes[node.right].cover;
        if (std::abs(child_sum - node.cover) > 1e-6 * node.cover) {
            out.push_back(tag(id) + " child covers sum to " + std::to_string(child_sum) +
                          " but the node covers " + std::to_string(node.cover));
        }
    }
    if (fs != tree.feature_set) {
        out.push_back("tree " + std::to_string(t) + " feature_set does not match its splits");
    }
}

}  // namespace

std::vector<std::string> validate(const TreeEnsemble& ens) {
    std::vector<std::string> out;
    if (ens.d < 1) out.push_back("model must have d >= 1 features");
    if (ens.d > 64) out.push_back("model has d = " + std::to_string(ens.d) + " features; at most 64 supported");
    if (ens.trees.empty()) out.push_back("model must contain at least one tree");
    if (!ens.feature_names.empty() && static_cast<int>(ens.feature_names.size()) != ens.d) {
        out.push_back("feature_names length does not match d");
    }
    if (!std::isfinite(ens.base_offset)) out.push_back("base_offset is not finite");
    if (ens.d >= 1 && ens.d <= 64) {
        for (std::size_t t = 0; t < ens.trees.size(); ++t) check_tree(ens, t, out);
    }
    return out;
}

std::string model_hash(const TreeEnsemble& ens) {
    const std::string doc = serialize_model(ens);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64-bit
    for (unsigned char c : doc) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace glex
