#include "glex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glex/rng.hpp"

namespace glex {

Scenario scenario_from_string(const std::string& s) {
    if (s == "interaction2d") return Scenario::interaction2d;
    if (s == "importance4d") return Scenario::importance4d;
    if (s == "salary") return Scenario::salary;
    throw parse_error("unknown scenario \"" + s +
                      "\" (expected interaction2d, importance4d or salary)");
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::interaction2d: return "interaction2d";
        case Scenario::importance4d: return "importance4d";
        default: return "salary";
    }
}

SimData generate(const SimSpec& spec) {
    if (spec.n == 0) throw validation_error("cannot simulate 0 rows");
    Rng rng(spec.seed);
    SimData out;
    out.x.n = spec.n;
    out.y.reserve(spec.n);

    switch (spec.scenario) {
        case Scenario::interaction2d: {
            if (std::abs(spec.corr) >= 1.0) {
                throw validation_error("correlation must lie in (-1, 1)");
            }
            out.x.d = 2;
            out.x.column_names = {"x1", "x2"};
            out.x.values.reserve(spec.n * 2);
            const double mix = std::sqrt(1.0 - spec.corr * spec.corr);
            for (std::size_t i = 0; i < spec.n; ++i) {
                const double z1 = rng.normal();
                const double z2 = rng.normal();
                const double x1 = z1;
                const double x2 = spec.corr * z1 + mix * z2;
                out.x.values.push_back(x1);
                out.x.values.push_back(x2);
                out.y.push_back(x1 + x2 + 2.0 * x1 * x2);
            }
            break;
        }
        case Scenario::importance4d: {
            out.x.d = 4;
            out.x.column_names = {"x1", "x2", "x3", "x4"};
            out.x.values.reserve(spec.n * 4);
            for (std::size_t i = 0; i < spec.n; ++i) {
                double v[4];
                for (double& c : v) c = rng.normal();
                out.x.values.insert(out.x.values.end(), v, v + 4);
                out.y.push_back(v[0] + v[2] + v[1] * v[2] - 2.0 * v[1] * v[2] * v[3]);
            }
            break;
        }
        case Scenario::salary: {
            out.x.d = 2;
            out.x.column_names = {"sex", "hours"};
            out.x.values.reserve(spec.n * 2);
            for (std::size_t i = 0; i < spec.n; ++i) {
                const double sex = static_cast<double>(i % 2);
                const double hours = 30.0 + 10.0 * sex + spec.hours_sd * rng.normal();
                out.x.values.push_back(sex);
                out.x.values.push_back(hours);
                out.y.push_back(hours + 20.0 * sex);
            }
            break;
        }
    }
    return out;
}

namespace {

// Midpoint of two consecutive distinct values; collapses to the lower value
// when rounding would reach the upper one, so "x <= threshold" keeps the
// scanned rows on the left either way.
double split_threshold(double lo, double hi) {
    double mid = lo + (hi - lo) / 2.0;
    if (!(mid < hi)) mid = lo;
    if (mid < lo) mid = lo;
    return mid;
}

struct NodeScan {
    std::int32_t id = -1;
    bool splittable = false;
    std::size_t count = 0;
    double sum = 0.0;
    double min_r = 0.0;
    double max_r = 0.0;
    // winning split so far
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    // per-feature sweep state
    std::size_t scan_count = 0;
    double scan_sum = 0.0;
    double scan_prev = 0.0;
    bool scan_started = false;
};

struct BuiltTree {
    Tree tree;
    std::vector<std::int32_t> leaf_of_row;
};

BuiltTree build_tree(const Dataset& data, const std::vector<std::vector<std::uint32_t>>& order,
                     const std::vector<double>& residual, const BoostParams& params) {
    const std::size_t n = data.n;

    BuiltTree out;
    Tree& tree = out.tree;
    tree.root = 0;
    tree.nodes.emplace_back();
    tree.nodes[0].cover = static_cast<double>(n);
    out.leaf_of_row.assign(n, 0);

    std::vector<std::int32_t> active = {0};
    std::vector<NodeScan> scans;
    std::vector<std::int32_t> slot_of_node;

    const auto min_leaf = static_cast<std::size_t>(params.min_rows_per_leaf);

    for (int depth = 0; depth < params.max_depth && !active.empty(); ++depth) {
        scans.assign(active.size(), NodeScan{});
        slot_of_node.assign(tree.nodes.size(), -1);
        for (std::size_t k = 0; k < active.size(); ++k) {
            scans[k].id = active[k];
            scans[k].min_r = std::numeric_limits<double>::infinity();
            scans[k].max_r = -std::numeric_limits<double>::infinity();
            slot_of_node[active[k]] = static_cast<std::int32_t>(k);
        }

        for (std::size_t i = 0; i < n; ++i) {
            const std::int32_t slot = slot_of_node[out.leaf_of_row[i]];
            if (slot < 0) continue;
            NodeScan& sc = scans[slot];
            ++sc.count;
            sc.sum += residual[i];
            sc.min_r = std::min(sc.min_r, residual[i]);
            sc.max_r = std::max(sc.max_r, residual[i]);
        }
        for (NodeScan& sc : scans) {
            sc.splittable = sc.count >= 2 * min_leaf && sc.min_r < sc.max_r;
        }

        // Exact greedy sweep: features in ascending order, rows in presorted
        // order, strict improvement only — ties resolve to the lowest
        // feature, then the lowest threshold.
        for (std::size_t j = 0; j < data.d; ++j) {
            for (NodeScan& sc : scans) {
                sc.scan_count = 0;
                sc.scan_sum = 0.0;
                sc.scan_started = false;
            }
            for (const std::uint32_t row : order[j]) {
                const std::int32_t slot = slot_of_node[out.leaf_of_row[row]];
                if (slot < 0) continue;
                NodeScan& sc = scans[slot];
                if (!sc.splittable) continue;
                const double v = data.at(row, j);
                if (sc.scan_started && v > sc.scan_prev && sc.scan_count >= min_leaf &&
                    sc.count - sc.scan_count >= min_leaf) {
                    const double sl = sc.scan_sum;
                    const auto cl = static_cast<double>(sc.scan_count);
                    const auto c = static_cast<double>(sc.count);
                    const double gain =
                        sl * sl / cl + (sc.sum - sl) * (sc.sum - sl) / (c - cl) - sc.sum * sc.sum / c;
                    if (gain > sc.best_gain) {
                        sc.best_gain = gain;
                        sc.best_feature = static_cast<int>(j);
                        sc.best_threshold = split_threshold(sc.scan_prev, v);
                    }
                }
                ++sc.scan_count;
                sc.scan_sum += residual[row];
                sc.scan_prev = v;
                sc.scan_started = true;
            }
        }

        // Materialize winners; everything else becomes a leaf now.
        std::vector<std::int32_t> next_active;
        for (NodeScan& sc : scans) {
            TreeNode& node = tree.nodes[sc.id];
            if (sc.best_feature < 0) {
                node.value = params.learning_rate * (sc.sum / static_cast<double>(sc.count));
                continue;
            }
            sc.left = static_cast<std::int32_t>(tree.nodes.size());
            sc.right = sc.left + 1;
            node.feature = sc.best_feature;
            node.threshold = sc.best_threshold;
            node.left = sc.left;
            node.right = sc.right;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            next_active.push_back(sc.left);
            next_active.push_back(sc.right);
        }

        // No node split: every active node is already a leaf with its value
        // set and leaf_of_row still points at it.
        if (next_active.empty()) {
            active.clear();
            break;
        }

        std::vector<std::size_t> child_count(tree.nodes.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::int32_t slot = slot_of_node[out.leaf_of_row[i]];
            if (slot < 0 || scans[slot].best_feature < 0) continue;
            const NodeScan& sc = scans[slot];
            const bool left = goes_left(ComparisonRule::less_or_equal,
                                        data.at(i, static_cast<std::size_t>(sc.best_feature)),
                                        sc.best_threshold);
            out.leaf_of_row[i] = left ? sc.left : sc.right;
            ++child_count[out.leaf_of_row[i]];
        }
        for (const std::int32_t id : next_active) {
            tree.nodes[id].cover = static_cast<double>(child_count[id]);
        }
        active = std::move(next_active);
    }

    // Nodes still pending after the depth cap (or after no node split) are
    // leaves; their values need one more stats pass.
    if (!active.empty()) {
        std::vector<std::size_t> count(tree.nodes.size(), 0);
        std::vector<double> sum(tree.nodes.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            count[out.leaf_of_row[i]] += 1;
            sum[out.leaf_of_row[i]] += residual[i];
        }
        for (const std::int32_t id : active) {
            TreeNode& node = tree.nodes[id];
            if (node.is_leaf() && count[id] > 0) {
                node.value = params.learning_rate * (sum[id] / static_cast<double>(count[id]));
            }
        }
    }

    tree.finalize_feature_set();
    return out;
}

}  // namespace

TreeEnsemble fit_gbt(const Dataset& data, std::span<const double> y, const BoostParams& params) {
    if (data.n == 0) throw validation_error("cannot fit on an empty dataset");
    if (y.size() != data.n) {
        throw validation_error("target length " + std::to_string(y.size()) +
                               " does not match the dataset rows " + std::to_string(data.n));
    }
    if (data.d > 64) throw validation_error("at most 64 features supported");
    if (params.rounds < 1 || params.max_depth < 1 || params.min_rows_per_leaf < 1 ||
        !(params.learning_rate > 0.0)) {
        throw validation_error("boosting parameters must satisfy rounds >= 1, max_depth >= 1, "
                               "min_rows_per_leaf >= 1, learning_rate > 0");
    }
    for (double v : data.values) {
        if (!std::isfinite(v)) throw validation_error("dataset contains non-finite values");
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw validation_error("target contains non-finite values");
    }

    const std::size_t n = data.n;
    std::vector<std::vector<std::uint32_t>> order(data.d);
    for (std::size_t j = 0; j < data.d; ++j) {
        order[j].resize(n);
        std::iota(order[j].begin(), order[j].end(), 0u);
        std::sort(order[j].begin(), order[j].end(), [&](std::uint32_t a, std::uint32_t b) {
            const double va = data.at(a, j);
            const double vb = data.at(b, j);
            return va < vb || (va == vb && a < b);
        });
    }

    double base = 0.0;
    for (double v : y) base += v;
    base /= static_cast<double>(n);

    TreeEnsemble ens;
    ens.d = static_cast<int>(data.d);
    ens.feature_names = data.column_names;
    if (ens.feature_names.empty()) {
        for (int j = 0; j < ens.d; ++j) ens.feature_names.push_back("f" + std::to_string(j));
    }
    ens.base_offset = base;
    ens.comparison_rule = ComparisonRule::less_or_equal;

    std::vector<double> pred(n, base);
    std::vector<double> residual(n);
    for (int round = 0; round < params.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
        BuiltTree built = build_tree(data, order, residual, params);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] += built.tree.nodes[built.leaf_of_row[i]].value;
        }
        ens.trees.push_back(std::move(built.tree));
    }
    return ens;
}

Dataset drop_columns(const Dataset& data, FeatureSet dropped) {
    Dataset out;
    out.n = data.n;
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < data.d; ++j) {
        if (j < 64 && dropped.contains(static_cast<int>(j))) continue;
        keep.push_back(j);
        if (j < data.column_names.size()) out.column_names.push_back(data.column_names[j]);
    }
    out.d = keep.size();
    out.values.reserve(out.n * out.d);
    for (std::size_t i = 0; i < data.n; ++i) {
        for (const std::size_t j : keep) out.values.push_back(data.at(i, j));
    }
    return out;
}

TreeEnsemble refit_without(const Dataset& data, std::span<const double> y,
                           const BoostParams& params, FeatureSet dropped) {
    const Dataset restricted = drop_columns(data, dropped);
    if (restricted.d == 0) throw validation_error("refit would drop every feature");
    return fit_gbt(restricted, y, params);
}

namespace {

std::int32_t random_tree_node(Rng& rng, Tree& tree, const std::vector<int>& pool, int depth,
                              int max_depth, double leaf_prob) {
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const bool leaf = depth >= max_depth || (depth > 0 && rng.uniform() < leaf_prob);
    if (leaf) {
        tree.nodes[id].value = rng.normal();
        return id;
    }
    const int feature = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
    const double threshold = rng.uniform(-2.0, 2.0);
    const std::int32_t left = random_tree_node(rng, tree, pool, depth + 1, max_depth, leaf_prob);
    const std::int32_t right = random_tree_node(rng, tree, pool, depth + 1, max_depth, leaf_prob);
    tree.nodes[id].feature = feature;
    tree.nodes[id].threshold = threshold;
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
}

void assign_covers(Rng& rng, Tree& tree, std::int32_t id, double cover) {
    tree.nodes[id].cover = cover;
    if (tree.nodes[id].is_leaf()) return;
    const double frac = rng.uniform(0.25, 0.75);
    const double left = cover * frac;
    assign_covers(rng, tree, tree.nodes[id].left, left);
    assign_covers(rng, tree, tree.nodes[id].right, cover - left);
}

}  // namespace

TreeEnsemble random_ensemble(const RandomEnsembleSpec& spec) {
    if (spec.d < 1 || spec.d > 64 || spec.n_trees < 1 || spec.max_depth < 1) {
        throw validation_error("random ensemble needs 1 <= d <= 64, n_trees >= 1, max_depth >= 1");
    }
    Rng rng(spec.seed);
    TreeEnsemble ens;
    ens.d = spec.d;
    for (int j = 0; j < spec.d; ++j) ens.feature_names.push_back("f" + std::to_string(j));
    ens.base_offset = rng.uniform(-0.5, 0.5);
    ens.comparison_rule = spec.rule;

    for (int t = 0; t < spec.n_trees; ++t) {
        // Feature pool of at most max_depth features keeps each tree's
        // interaction order within the depth.
        const int pool_size =
            static_cast<int>(rng.uniform_int(1, std::min(spec.max_depth, spec.d)));
        std::vector<int> pool;
        while (static_cast<int>(pool.size()) < pool_size) {
            const int f = static_cast<int>(rng.uniform_int(0, spec.d - 1));
            if (std::find(pool.begin(), pool.end(), f) == pool.end()) pool.push_back(f);
        }
        Tree tree;
        tree.root = random_tree_node(rng, tree, pool, 0, spec.max_depth, spec.leaf_prob);
        assign_covers(rng, tree, tree.root, rng.uniform(500.0, 1500.0));
        tree.finalize_feature_set();
        ens.trees.push_back(std::move(tree));
    }
    return ens;
}

Dataset random_dataset(std::size_t n, int d, std::uint64_t seed) {
    Rng rng(seed);
    Dataset out;
    out.n = n;
    out.d = static_cast<std::size_t>(d);
    for (int j = 0; j < d; ++j) out.column_names.push_back("f" + std::to_string(j));
    out.values.resize(n * out.d);
    for (double& v : out.values) v = rng.normal();
    return out;
}

}  // namespace glex
