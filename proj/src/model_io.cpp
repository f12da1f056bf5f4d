#include "glex/model_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace glex {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw parse_error(std::string(what) + ": malformed JSON");
    return doc;
}

double require_number(const json& obj, const char* key, const char* where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        throw parse_error(std::string(where) + ": missing or non-numeric \"" + key + "\"");
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw parse_error(std::string(where) + ": \"" + key + "\" is not finite");
    return v;
}

std::int64_t require_int(const json& obj, const char* key, const char* where) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number_integer()) {
        throw parse_error(std::string(where) + ": missing or non-integer \"" + key + "\"");
    }
    return it->get<std::int64_t>();
}

void throw_on_violations(const TreeEnsemble& ens, const char* what) {
    std::vector<std::string> violations = validate(ens);
    if (violations.empty()) return;
    // One line so the message survives as a machine-parseable diagnostic.
    std::string msg = std::string(what) + ": invalid model: ";
    std::size_t shown = 0;
    for (const std::string& v : violations) {
        if (shown) msg += "; ";
        msg += v;
        if (++shown == 8 && violations.size() > 8) {
            msg += "; (" + std::to_string(violations.size() - 8) + " more)";
            break;
        }
    }
    throw validation_error(msg);
}

}  // namespace

TreeEnsemble parse_model(const std::string& json_text) {
    const char* what = "model";
    json doc = parse_json(json_text, what);
    if (!doc.is_object()) throw parse_error("model: top-level value must be an object");
    if (require_int(doc, "version", what) != 1) {
        throw parse_error("model: unsupported version (expected 1)");
    }

    TreeEnsemble ens;
    ens.d = static_cast<int>(require_int(doc, "d", what));
    ens.base_offset = require_number(doc, "base_offset", what);

    auto rule_it = doc.find("comparison_rule");
    if (rule_it == doc.end() || !rule_it->is_string()) {
        throw parse_error("model: missing \"comparison_rule\"");
    }
    ens.comparison_rule = comparison_rule_from_string(rule_it->get<std::string>());

    auto names_it = doc.find("feature_names");
    if (names_it != doc.end()) {
        if (!names_it->is_array()) throw parse_error("model: \"feature_names\" must be an array");
        for (const json& name : *names_it) {
            if (!name.is_string()) throw parse_error("model: feature names must be strings");
            ens.feature_names.push_back(name.get<std::string>());
        }
    } else {
        for (int j = 0; j < ens.d; ++j) ens.feature_names.push_back("f" + std::to_string(j));
    }

    auto trees_it = doc.find("trees");
    if (trees_it == doc.end() || !trees_it->is_array()) {
        throw parse_error("model: missing \"trees\" array");
    }
    for (const json& jt : *trees_it) {
        if (!jt.is_object()) throw parse_error("model: each tree must be an object");
        Tree tree;
        tree.root = static_cast<std::int32_t>(require_int(jt, "root", "tree"));
        auto nodes_it = jt.find("nodes");
        if (nodes_it == jt.end() || !nodes_it->is_array()) {
            throw parse_error("tree: missing \"nodes\" array");
        }
        for (const json& jn : *nodes_it) {
            if (!jn.is_object()) throw parse_error("tree: each node must be an object");
            TreeNode node;
            node.cover = require_number(jn, "cover", "node");
            if (jn.contains("leaf")) {
                node.value = require_number(jn, "leaf", "node");
            } else {
                node.feature = static_cast<std::int32_t>(require_int(jn, "feature", "node"));
                node.threshold = require_number(jn, "threshold", "node");
                node.left = static_cast<std::int32_t>(require_int(jn, "left", "node"));
                node.right = static_cast<std::int32_t>(require_int(jn, "right", "node"));
                if (node.left < 0 || node.right < 0) {
                    throw parse_error("node: child indices must be non-negative");
                }
            }
            tree.nodes.push_back(node);
        }
        tree.finalize_feature_set();
        ens.trees.push_back(std::move(tree));
    }

    throw_on_violations(ens, what);
    return ens;
}

std::string serialize_model(const TreeEnsemble& ens) {
    json doc;
    doc["version"] = 1;
    doc["d"] = ens.d;
    doc["feature_names"] = ens.feature_names;
    doc["base_offset"] = ens.base_offset;
    doc["comparison_rule"] = to_string(ens.comparison_rule);
    json trees = json::array();
    for (const Tree& tree : ens.trees) {
        json jt;
        jt["root"] = tree.root;
        json nodes = json::array();
        for (const TreeNode& node : tree.nodes) {
            json jn;
            jn["cover"] = node.cover;
            if (node.is_leaf()) {
                jn["leaf"] = node.value;
            } else {
                jn["feature"] = node.feature;
                jn["threshold"] = node.threshold;
                jn["left"] = node.left;
                jn["right"] = node.right;
            }
            nodes.push_back(std::move(jn));
        }
        jt["nodes"] = std::move(nodes);
        trees.push_back(std::move(jt));
    }
    doc["trees"] = std::move(trees);
    return doc.dump();
}

namespace {

struct BoosterContext {
    const std::vector<std::string>* names;          // nullptr → infer f<k>
    std::map<std::string, int> name_to_index;
    int max_inferred = -1;
};

int booster_feature_index(BoosterContext& ctx, const std::string& split) {
    if (ctx.names != nullptr) {
        auto it = ctx.name_to_index.find(split);
        if (it == ctx.name_to_index.end()) {
            throw parse_error("booster dump: unknown feature name \"" + split + "\"");
        }
        return it->second;
    }
    // No sidecar names: require the f<k> pattern and infer d from it.
    if (split.size() < 2 || split[0] != 'f') {
        throw parse_error("booster dump: feature name \"" + split +
                          "\" does not match f<index>; pass an explicit feature-name list");
    }
    int k = 0;
    auto [ptr, ec] = std::from_chars(split.data() + 1, split.data() + split.size(), k);
    if (ec != std::errc() || ptr != split.data() + split.size() || k < 0) {
        throw parse_error("booster dump: feature name \"" + split +
                          "\" does not match f<index>; pass an explicit feature-name list");
    }
    ctx.max_inferred = std::max(ctx.max_inferred, k);
    return k;
}

// Flattens one dump node (and its subtree) into tree.nodes, returning its index.
std::int32_t booster_node(BoosterContext& ctx, const json& jn, Tree& tree) {
    if (!jn.is_object()) throw parse_error("booster dump: each node must be an object");
    const std::int32_t index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[index].cover = require_number(jn, "cover", "booster node");

    if (jn.contains("leaf")) {
        tree.nodes[index].value = require_number(jn, "leaf", "booster node");
        return index;
    }

    auto split_it = jn.find("split");
    if (split_it == jn.end() || !split_it->is_string()) {
        throw parse_error("booster dump: internal node missing \"split\"");
    }
    const int feature = booster_feature_index(ctx, split_it->get<std::string>());
    const double threshold = require_number(jn, "split_condition", "booster node");
    const auto yes = require_int(jn, "yes", "booster node");
    const auto no = require_int(jn, "no", "booster node");
    if (yes == no) throw parse_error("booster dump: \"yes\" and \"no\" point at the same child");
    if (jn.contains("missing")) {
        const auto missing = require_int(jn, "missing", "booster node");
        if (missing != yes && missing != no) {
            throw parse_error(
                "booster dump: \"missing\" branch (nodeid " + std::to_string(missing) +
                ") differs from both children; such a model is not a function of the inputs");
        }
    }

    auto children_it = jn.find("children");
    if (children_it == jn.end() || !children_it->is_array() || children_it->size() != 2) {
        throw parse_error("booster dump: internal node must carry exactly two children");
    }
    const json* yes_child = nullptr;
    const json* no_child = nullptr;
    for (const json& child : *children_it) {
        const auto nodeid = require_int(child, "nodeid", "booster node");
        if (nodeid == yes) yes_child = &child;
        else if (nodeid == no) no_child = &child;
    }
    if (yes_child == nullptr || no_child == nullptr) {
        throw parse_error("booster dump: children do not match the \"yes\"/\"no\" node ids");
    }

    // "yes" is the branch taken when x < split_condition, i.e. the left child.
    const std::int32_t left = booster_node(ctx, *yes_child, tree);
    const std::int32_t right = booster_node(ctx, *no_child, tree);
    tree.nodes[index].feature = feature;
    tree.nodes[index].threshold = threshold;
    tree.nodes[index].left = left;
    tree.nodes[index].right = right;
    return index;
}

}  // namespace

TreeEnsemble parse_booster_dump(const std::string& json_text,
                                std::vector<std::string> feature_names,
                                double base_offset,
                                std::optional<int> num_features) {
    json doc = parse_json(json_text, "booster dump");
    if (!doc.is_array()) throw parse_error("booster dump: top-level value must be an array of trees");
    if (doc.empty()) throw parse_error("booster dump: empty tree array");

    BoosterContext ctx;
    ctx.names = feature_names.empty() ? nullptr : &feature_names;
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
        ctx.name_to_index.emplace(feature_names[j], static_cast<int>(j));
    }

    TreeEnsemble ens;
    ens.base_offset = base_offset;
    ens.comparison_rule = ComparisonRule::less_than;
    for (const json& jt : doc) {
        Tree tree;
        tree.root = booster_node(ctx, jt, tree);
        tree.finalize_feature_set();
        ens.trees.push_back(std::move(tree));
    }

    if (!feature_names.empty()) {
        ens.d = static_cast<int>(feature_names.size());
        ens.feature_names = std::move(feature_names);
    } else {
        ens.d = num_features.value_or(ctx.max_inferred + 1);
        if (ens.d < 1) ens.d = 1;
        if (ctx.max_inferred + 1 > ens.d) {
            throw parse_error("booster dump: split on f" + std::to_string(ctx.max_inferred) +
                              " but only " + std::to_string(ens.d) + " features declared");
        }
        for (int j = 0; j < ens.d; ++j) ens.feature_names.push_back("f" + std::to_string(j));
    }

    throw_on_violations(ens, "booster dump");
    return ens;
}

namespace {

double parse_cell(const std::string& cell, std::size_t line_no, std::size_t col) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (last[-1] == ' ' || last[-1] == '\t')) --last;
    if (first == last) {
        throw parse_error("csv: empty cell at line " + std::to_string(line_no) + ", column " +
                          std::to_string(col + 1) + " (missing values are not supported)");
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw parse_error("csv: cannot parse \"" + std::string(first, last) + "\" at line " +
                          std::to_string(line_no) + ", column " + std::to_string(col + 1));
    }
    return v;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Dataset parse_csv(const std::string& text) {
    Dataset data;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (pos > text.size()) break;  // trailing newline
            if (!have_header) throw parse_error("csv: missing header row");
            throw parse_error("csv: blank line at line " + std::to_string(line_no));
        }
        std::vector<std::string> cells = split_line(line);
        if (!have_header) {
            data.column_names = cells;
            data.d = cells.size();
            have_header = true;
            continue;
        }
        if (cells.size() != data.d) {
            throw parse_error("csv: line " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(data.d));
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            data.values.push_back(parse_cell(cells[j], line_no, j));
        }
        ++data.n;
    }
    if (!have_header) throw parse_error("csv: empty document");
    return data;
}

Dataset load_csv_file(const std::string& path) {
    return parse_csv(read_file(path));
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing file: " + path);
}

std::vector<std::string> parse_name_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        std::size_t start = 0;
        while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
        line = line.substr(start);
        if (!line.empty()) out.push_back(line);
        if (pos > text.size()) break;
    }
    return out;
}

}  // namespace glex
