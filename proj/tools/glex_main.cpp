// glex: exact decomposition of tree-ensemble models into interaction
// components, with attribution, partial-dependence, importance, de-biasing,
// simulation, fitting, and benchmarking subcommands. All outputs are CSV or
// JSON; every failure exits nonzero with a single-line "glex: error:"
// diagnostic (exit 2 when a resource guard refuses the computation).
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "glex/decompose.hpp"
#include "glex/explain.hpp"
#include "glex/grid.hpp"
#include "glex/model_io.hpp"
#include "glex/synth.hpp"
#include "json.hpp"

namespace {

using namespace glex;

struct ModelFlags {
    std::string path;
    std::string format = "native";
    std::string features_path;
    double base_offset = 0.0;
    std::optional<int> num_features;
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
    cmd->add_option("--model", mf.path, "model file (native JSON or booster dump)")
        ->required();
    cmd->add_option("--model-format", mf.format, "model file format")
        ->check(CLI::IsMember({"native", "booster"}))
        ->capture_default_str();
    cmd->add_option("--features", mf.features_path,
                    "feature-name list file (booster dumps; one name per line)");
    cmd->add_option("--base-offset", mf.base_offset,
                    "additive offset of a booster dump (its base score)")
        ->capture_default_str();
    int num_features = 0;
    cmd->add_option_function<int>(
           "--num-features",
           [&mf](const int& v) { mf.num_features = v; },
           "total feature count of a booster dump (when trees do not use all)")
        ->check(CLI::PositiveNumber);
    (void)num_features;
}

TreeEnsemble load_model(const ModelFlags& mf) {
    const std::string text = read_file(mf.path);
    if (mf.format == "native") return parse_model(text);
    std::vector<std::string> names;
    if (!mf.features_path.empty()) names = parse_name_list(read_file(mf.features_path));
    return parse_booster_dump(text, std::move(names), mf.base_offset, mf.num_features);
}

// The evaluation dataset for a model: when every model feature appears among
// the CSV columns, select (and reorder) those columns by name, so extra
// columns such as a simulated target are ignored; otherwise fall back to
// positional columns, which requires the widths to agree.
Dataset align_data(const TreeEnsemble& ens, Dataset data) {
    std::vector<int> pick;
    pick.reserve(ens.feature_names.size());
    for (const std::string& name : ens.feature_names) {
        const auto it = std::find(data.column_names.begin(), data.column_names.end(), name);
        if (it == data.column_names.end()) break;
        pick.push_back(static_cast<int>(it - data.column_names.begin()));
    }
    if (pick.size() == ens.feature_names.size()) {
        Dataset out;
        out.n = data.n;
        out.d = ens.d;
        out.column_names = ens.feature_names;
        out.values.reserve(data.n * static_cast<std::size_t>(ens.d));
        for (std::size_t i = 0; i < data.n; ++i) {
            for (int j : pick) out.values.push_back(data.at(i, j));
        }
        return out;
    }
    if (data.d != ens.d) {
        throw validation_error("dataset has " + std::to_string(data.d) +
                               " columns but the model expects " + std::to_string(ens.d) +
                               " features and the column names do not cover them");
    }
    return data;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    write_file(out_path, content);
}

std::string subset_label(FeatureSet s, const std::vector<std::string>& names) {
    std::vector<std::string> parts;
    for (int k : s.indices()) parts.push_back(names[static_cast<std::size_t>(k)]);
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ':';
        out += parts[i];
    }
    return out;
}

FeatureSet subset_from_names(const std::string& arg, const std::vector<std::string>& names) {
    FeatureSet s;
    std::string token;
    const auto flush = [&] {
        if (token.empty()) return;
        const auto it = std::find(names.begin(), names.end(), token);
        if (it == names.end()) {
            throw validation_error("unknown feature name: " + token);
        }
        s = s.with(static_cast<int>(it - names.begin()));
        token.clear();
    };
    for (char c : arg) {
        if (c == ':' || c == ',') {
            flush();
        } else {
            token += c;
        }
    }
    flush();
    return s;
}

DecomposeOptions decompose_options(int threads) {
    DecomposeOptions opts;
    opts.threads = threads;
    if (const char* env = std::getenv("GLEX_MAX_DEPTH")) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(env, &used);
            if (used != std::string(env).size() || v < 1) throw std::invalid_argument(env);
            opts.max_interaction = v;
        } catch (const std::exception&) {
            throw validation_error(std::string("GLEX_MAX_DEPTH must be a positive integer, got '") +
                                   env + "'");
        }
    }
    return opts;
}

ComponentStore build_store(const TreeEnsemble& ens, const Dataset& data,
                           const std::string& algorithm, int threads) {
    const DecomposeOptions opts = decompose_options(threads);
    if (algorithm == "naive") return decompose_naive(ens, data, opts);
    if (algorithm == "fast") return decompose_fast(ens, data, opts);
    check_interaction_cap(ens, opts.max_interaction);
    const GridEnsemble grid = grid_from_ensemble(ens, data);
    const EmpiricalDensity density = estimate_density(data, grid.grid, density_subsets_for(grid));
    return decompose_grid(grid, density, data);
}

std::string component_csv(const ComponentStore& store, const std::vector<std::string>& names) {
    std::string out = "row_id,subset,value\n";
    for (std::size_t i = 0; i < store.n_rows; ++i) {
        out += std::to_string(i);
        out += ",,";
        out += format_double(store.intercept);
        out += '\n';
        for (const auto& [s, vals] : store.components) {
            out += std::to_string(i);
            out += ',';
            out += subset_label(s, names);
            out += ',';
            out += format_double(vals[i]);
            out += '\n';
        }
    }
    return out;
}

std::string metadata_json(const TreeEnsemble& ens, const ComponentStore& store) {
    nlohmann::json meta;
    meta["model_hash"] = model_hash(ens);
    meta["n"] = store.n_rows;
    meta["d"] = ens.d;
    meta["q"] = store.max_order();
    meta["realized_subsets"] = store.components.size();
    return meta.dump(2) + "\n";
}

std::vector<std::size_t> parse_size_list(const std::string& arg, const std::string& flag) {
    std::vector<std::size_t> out;
    std::string token;
    const auto flush = [&] {
        if (token.empty()) return;
        try {
            std::size_t used = 0;
            const long long v = std::stoll(token, &used);
            if (used != token.size() || v < 1) throw std::invalid_argument(token);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw validation_error(flag + " expects a comma list of positive integers, got '" +
                                   token + "'");
        }
        token.clear();
    };
    for (char c : arg) {
        if (c == ',') {
            flush();
        } else {
            token += c;
        }
    }
    flush();
    if (out.empty()) throw validation_error(flag + " expects at least one value");
    return out;
}

// ---------------------------------------------------------------- subcommands

struct CommonFlags {
    ModelFlags model;
    std::string data_path;
    std::string out_path;
    std::string algorithm = "fast";
    int threads = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& cf, bool with_algorithm = true) {
    add_model_flags(cmd, cf.model);
    cmd->add_option("--data", cf.data_path, "dataset CSV (background sample and eval rows)")
        ->required();
    cmd->add_option("--out", cf.out_path, "output file (stdout when omitted)");
    if (with_algorithm) {
        cmd->add_option("--algorithm", cf.algorithm, "decomposition engine")
            ->check(CLI::IsMember({"naive", "fast", "grid"}))
            ->capture_default_str();
    }
    cmd->add_option("--threads", cf.threads, "worker cap for the fast engine (0 = all)")
        ->check(CLI::NonNegativeNumber);
}

int cmd_decompose(const CommonFlags& cf, const std::string& metadata_out) {
    const TreeEnsemble ens = load_model(cf.model);
    const Dataset data = align_data(ens, load_csv_file(cf.data_path));
    const ComponentStore store = build_store(ens, data, cf.algorithm, cf.threads);
    emit(cf.out_path, component_csv(store, ens.feature_names));
    std::string meta_path = metadata_out;
    if (meta_path.empty() && !cf.out_path.empty()) meta_path = cf.out_path + ".meta.json";
    if (!meta_path.empty()) write_file(meta_path, metadata_json(ens, store));
    return 0;
}

int cmd_shap(const CommonFlags& cf, bool oracle, bool check_efficiency) {
    const TreeEnsemble ens = load_model(cf.model);
    const Dataset data = align_data(ens, load_csv_file(cf.data_path));
    const ComponentStore store = build_store(ens, data, cf.algorithm, cf.threads);
    const ShapMatrix shap = shap_from_components(store, ens.d);

    if (oracle) {
        for (std::size_t i = 0; i < data.n; ++i) {
            const ShapValues exact = shap_bruteforce(ens, data.row(i));
            double worst = std::abs(exact.phi0 - shap.phi0);
            for (int k = 0; k < ens.d; ++k) {
                worst = std::max(worst, std::abs(exact.phi[static_cast<std::size_t>(k)] -
                                                 shap.at(i, k)));
            }
            if (worst > 1e-9) {
                throw validation_error("exact-attribution check failed at row " +
                                       std::to_string(i) + ": max difference " +
                                       format_double(worst));
            }
        }
    }
    if (check_efficiency) {
        for (std::size_t i = 0; i < data.n; ++i) {
            double total = shap.phi0;
            for (int k = 0; k < ens.d; ++k) total += shap.at(i, k);
            const double gap = std::abs(total - predict(ens, data.row(i)));
            if (gap > 1e-9) {
                throw validation_error("efficiency violated at row " + std::to_string(i) +
                                       ": residual " + format_double(gap));
            }
        }
    }

    std::string out = "row_id,feature,phi\n";
    for (std::size_t i = 0; i < data.n; ++i) {
        for (int k = 0; k < ens.d; ++k) {
            out += std::to_string(i);
            out += ',';
            out += ens.feature_names[static_cast<std::size_t>(k)];
            out += ',';
            out += format_double(shap.at(i, k));
            out += '\n';
        }
    }
    emit(cf.out_path, out);
    return 0;
}

int cmd_pdp(const CommonFlags& cf, const std::string& subset_arg) {
    const TreeEnsemble ens = load_model(cf.model);
    const Dataset data = align_data(ens, load_csv_file(cf.data_path));
    const FeatureSet s = subset_from_names(subset_arg, ens.feature_names);
    const ComponentStore store = build_store(ens, data, cf.algorithm, cf.threads);
    const PdpCurve curve = pdp(store, s, &data);

    const std::vector<int> feats = s.indices();
    const std::string label = subset_label(s, ens.feature_names);
    std::string out = "subset";
    for (int k : feats) out += ',' + ens.feature_names[static_cast<std::size_t>(k)];
    out += ",xi\n";
    for (std::size_t i = 0; i < store.n_rows; ++i) {
        out += label;
        for (std::size_t j = 0; j < feats.size(); ++j) {
            out += ',';
            out += format_double(curve.eval_coords[i * feats.size() + j]);
        }
        out += ',';
        out += format_double(curve.values[i]);
        out += '\n';
    }
    emit(cf.out_path, out);
    return 0;
}

int cmd_importance(const CommonFlags& cf) {
    const TreeEnsemble ens = load_model(cf.model);
    const Dataset data = align_data(ens, load_csv_file(cf.data_path));
    const ComponentStore store = build_store(ens, data, cf.algorithm, cf.threads);
    const ImportanceReport report = importance(store, ens.d);

    std::string out = "kind,key,value\n";
    for (int k = 0; k < ens.d; ++k) {
        out += "shap," + ens.feature_names[static_cast<std::size_t>(k)] + ',' +
               format_double(report.shap_importance[static_cast<std::size_t>(k)]) + '\n';
    }
    for (int k = 0; k < ens.d; ++k) {
        out += "split," + ens.feature_names[static_cast<std::size_t>(k)] + ',' +
               format_double(report.split_importance[static_cast<std::size_t>(k)]) + '\n';
    }
    for (const auto& [s, value] : report.component_importance) {
        out += "component," + subset_label(s, ens.feature_names) + ',' + format_double(value) +
               '\n';
    }
    emit(cf.out_path, out);
    return 0;
}

int cmd_debias(const CommonFlags& cf, const std::string& remove_arg,
               const std::string& components_out) {
    const TreeEnsemble ens = load_model(cf.model);
    const Dataset data = align_data(ens, load_csv_file(cf.data_path));
    const FeatureSet removed = subset_from_names(remove_arg, ens.feature_names);
    const ComponentStore store = build_store(ens, data, cf.algorithm, cf.threads);
    const DebiasedModel debiased = remove_features(store, removed);

    std::string out = "row_id,yhat\n";
    const std::vector<double> preds = debiased.predictions();
    for (std::size_t i = 0; i < preds.size(); ++i) {
        out += std::to_string(i) + ',' + format_double(preds[i]) + '\n';
    }
    emit(cf.out_path, out);

    std::string comp_path = components_out;
    if (comp_path.empty() && !cf.out_path.empty()) comp_path = cf.out_path + ".components.csv";
    if (!comp_path.empty()) {
        write_file(comp_path, component_csv(debiased.store, ens.feature_names));
    }
    return 0;
}

int cmd_simulate(const std::string& scenario, std::size_t n, std::uint64_t seed, double corr,
                 double hours_sd, const std::string& out_path) {
    SimSpec spec;
    spec.scenario = scenario_from_string(scenario);
    spec.n = n;
    spec.seed = seed;
    spec.corr = corr;
    spec.hours_sd = hours_sd;
    const SimData sim = generate(spec);

    std::string out;
    for (std::size_t j = 0; j < sim.x.column_names.size(); ++j) {
        if (j) out += ',';
        out += sim.x.column_names[j];
    }
    out += ",y\n";
    for (std::size_t i = 0; i < sim.x.n; ++i) {
        for (int j = 0; j < sim.x.d; ++j) {
            if (j) out += ',';
            out += format_double(sim.x.at(i, j));
        }
        out += ',';
        out += format_double(sim.y[i]);
        out += '\n';
    }
    emit(out_path, out);
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& target, const BoostParams& params,
            const std::string& out_path) {
    const Dataset full = load_csv_file(data_path);
    const auto target_it =
        std::find(full.column_names.begin(), full.column_names.end(), target);
    if (target_it == full.column_names.end()) {
        throw validation_error("target column '" + target + "' not found in " + data_path);
    }
    const int target_idx = static_cast<int>(target_it - full.column_names.begin());

    Dataset x;
    x.n = full.n;
    x.d = full.d - 1;
    std::vector<double> y;
    y.reserve(full.n);
    for (int j = 0; j < full.d; ++j) {
        if (j != target_idx) x.column_names.push_back(full.column_names[static_cast<std::size_t>(j)]);
    }
    x.values.reserve(full.n * static_cast<std::size_t>(x.d));
    for (std::size_t i = 0; i < full.n; ++i) {
        for (int j = 0; j < full.d; ++j) {
            if (j == target_idx) {
                y.push_back(full.at(i, j));
            } else {
                x.values.push_back(full.at(i, j));
            }
        }
    }

    const TreeEnsemble ens = fit_gbt(x, y, params);
    emit(out_path, serialize_model(ens) + "\n");
    return 0;
}

int cmd_bench(const std::string& n_arg, const std::string& d_arg, const std::string& rounds_arg,
              const std::string& depth_arg, std::uint64_t seed, int threads,
              const std::string& out_path) {
    const std::vector<std::size_t> ns = parse_size_list(n_arg, "--n");
    const std::vector<std::size_t> ds = parse_size_list(d_arg, "--d");
    const std::vector<std::size_t> rounds = parse_size_list(rounds_arg, "--rounds");
    const std::vector<std::size_t> depths = parse_size_list(depth_arg, "--depth");
    const DecomposeOptions opts = decompose_options(threads);

    const auto seconds_since = [](std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    nlohmann::json report = nlohmann::json::array();
    std::uint64_t point = 0;
    for (std::size_t n : ns) {
        for (std::size_t d : ds) {
            for (std::size_t b : rounds) {
                for (std::size_t depth : depths) {
                    RandomEnsembleSpec spec;
                    spec.d = static_cast<int>(d);
                    spec.n_trees = static_cast<int>(b);
                    spec.max_depth = static_cast<int>(depth);
                    spec.seed = seed + point;
                    const TreeEnsemble ens = random_ensemble(spec);
                    const Dataset data = random_dataset(n, spec.d, seed + point + 101);

                    const auto t_naive = std::chrono::steady_clock::now();
                    const ComponentStore naive = decompose_naive(ens, data, opts);
                    const double naive_seconds = seconds_since(t_naive);
                    const auto t_fast = std::chrono::steady_clock::now();
                    const ComponentStore fast = decompose_fast(ens, data, opts);
                    const double fast_seconds = seconds_since(t_fast);

                    double max_diff = std::abs(naive.intercept - fast.intercept);
                    for (const auto& [s, vals] : naive.components) {
                        const auto it = fast.components.find(s);
                        if (it == fast.components.end()) {
                            max_diff = std::numeric_limits<double>::infinity();
                            continue;
                        }
                        for (std::size_t i = 0; i < vals.size(); ++i) {
                            max_diff = std::max(max_diff, std::abs(vals[i] - it->second[i]));
                        }
                    }

                    nlohmann::json record;
                    record["n"] = n;
                    record["d"] = d;
                    record["rounds"] = b;
                    record["depth"] = depth;
                    record["naive_seconds"] = naive_seconds;
                    record["fast_seconds"] = fast_seconds;
                    record["speedup"] = naive_seconds / fast_seconds;
                    record["max_component_diff"] = max_diff;
                    report.push_back(record);
                    ++point;
                }
            }
        }
    }
    emit(out_path, report.dump(2) + "\n");
    return 0;
}

int cmd_validate(const ModelFlags& mf) {
    // parse_model / parse_booster_dump already refuse invalid documents with
    // a diagnostic listing the violations, which main() prints.
    const TreeEnsemble ens = load_model(mf);
    const std::vector<std::string> violations = validate(ens);
    if (!violations.empty()) {
        for (const std::string& v : violations) std::cout << "violation: " << v << '\n';
        throw validation_error("model failed validation (" +
                               std::to_string(violations.size()) + " violations)");
    }
    std::cout << "ok " << model_hash(ens) << " d=" << ens.d << " trees=" << ens.trees.size()
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact decomposition of tree ensembles into interaction components"};
    app.require_subcommand(1);
    int exit_code = 0;

    CommonFlags dec;
    std::string dec_metadata_out;
    CLI::App* decompose = app.add_subcommand(
        "decompose", "write the per-row component table for a model on a dataset");
    add_common_flags(decompose, dec);
    decompose->add_option("--metadata-out", dec_metadata_out,
                          "metadata JSON path (default: <out>.meta.json)");
    decompose->callback([&] { exit_code = cmd_decompose(dec, dec_metadata_out); });

    CommonFlags shap;
    bool shap_oracle = false;
    bool shap_efficiency = false;
    CLI::App* shap_cmd =
        app.add_subcommand("shap", "write per-row, per-feature attribution values");
    add_common_flags(shap_cmd, shap);
    shap_cmd->add_flag("--oracle", shap_oracle,
                       "cross-check against the exhaustive computation (requires d <= 20)");
    shap_cmd->add_flag("--check-efficiency", shap_efficiency,
                       "verify per-row that the attributions sum to the prediction");
    shap_cmd->callback([&] { exit_code = cmd_shap(shap, shap_oracle, shap_efficiency); });

    CommonFlags pdp_flags;
    std::string pdp_subset;
    CLI::App* pdp_cmd =
        app.add_subcommand("pdp", "write the partial-dependence curve of a feature subset");
    add_common_flags(pdp_cmd, pdp_flags);
    pdp_cmd->add_option("--subset", pdp_subset,
                        "feature names joined by ':' (empty = intercept curve)");
    pdp_cmd->callback([&] { exit_code = cmd_pdp(pdp_flags, pdp_subset); });

    CommonFlags imp;
    CLI::App* imp_cmd =
        app.add_subcommand("importance", "write feature and component importance measures");
    add_common_flags(imp_cmd, imp);
    imp_cmd->callback([&] { exit_code = cmd_importance(imp); });

    CommonFlags deb;
    std::string deb_remove;
    std::string deb_components_out;
    CLI::App* deb_cmd = app.add_subcommand(
        "debias", "drop every component touching the removed features and predict");
    add_common_flags(deb_cmd, deb);
    deb_cmd->add_option("--remove", deb_remove, "feature names to remove, joined by ':' or ','")
        ->required();
    deb_cmd->add_option("--components-out", deb_components_out,
                        "surviving-component CSV path (default: <out>.components.csv)");
    deb_cmd->callback([&] { exit_code = cmd_debias(deb, deb_remove, deb_components_out); });

    std::string sim_scenario;
    std::size_t sim_n = 1000;
    std::uint64_t sim_seed = 1;
    double sim_corr = 0.3;
    double sim_hours_sd = 4.0;
    std::string sim_out;
    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "draw a synthetic dataset and write it with its target");
    sim_cmd->add_option("--scenario", sim_scenario, "generator")
        ->check(CLI::IsMember({"interaction2d", "importance4d", "salary"}))
        ->required();
    sim_cmd->add_option("--n", sim_n, "rows")->check(CLI::PositiveNumber)->capture_default_str();
    sim_cmd->add_option("--seed", sim_seed, "generator seed")->capture_default_str();
    sim_cmd->add_option("--corr", sim_corr, "feature correlation (interaction2d)")
        ->capture_default_str();
    sim_cmd->add_option("--hours-sd", sim_hours_sd, "hours spread (salary)")
        ->capture_default_str();
    sim_cmd->add_option("--out", sim_out, "output CSV (stdout when omitted)");
    sim_cmd->callback([&] {
        exit_code = cmd_simulate(sim_scenario, sim_n, sim_seed, sim_corr, sim_hours_sd, sim_out);
    });

    std::string fit_data;
    std::string fit_target = "y";
    std::string fit_out;
    BoostParams fit_params;
    CLI::App* fit_cmd =
        app.add_subcommand("fit", "train a boosted tree model and write it as native JSON");
    fit_cmd->add_option("--data", fit_data, "training CSV containing the target column")
        ->required();
    fit_cmd->add_option("--target", fit_target, "target column name")->capture_default_str();
    fit_cmd->add_option("--rounds", fit_params.rounds, "boosting rounds")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fit_cmd->add_option("--depth", fit_params.max_depth, "maximum tree depth")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fit_cmd->add_option("--learning-rate", fit_params.learning_rate, "shrinkage per round")
        ->capture_default_str();
    fit_cmd->add_option("--min-leaf", fit_params.min_rows_per_leaf, "minimum rows per leaf")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fit_cmd->add_option("--out", fit_out, "model output path (stdout when omitted)");
    fit_cmd->callback([&] { exit_code = cmd_fit(fit_data, fit_target, fit_params, fit_out); });

    std::string bench_n = "10000";
    std::string bench_d = "10";
    std::string bench_rounds = "100";
    std::string bench_depth = "4";
    std::uint64_t bench_seed = 1;
    int bench_threads = 0;
    std::string bench_out;
    CLI::App* bench_cmd = app.add_subcommand(
        "bench", "time the serial reference engine against the fast engine");
    bench_cmd->add_option("--n", bench_n, "comma list of row counts")->capture_default_str();
    bench_cmd->add_option("--d", bench_d, "comma list of feature counts")->capture_default_str();
    bench_cmd->add_option("--rounds", bench_rounds, "comma list of tree counts")
        ->capture_default_str();
    bench_cmd->add_option("--depth", bench_depth, "comma list of tree depths")
        ->capture_default_str();
    bench_cmd->add_option("--seed", bench_seed, "generator seed")->capture_default_str();
    bench_cmd->add_option("--threads", bench_threads, "worker cap for the fast engine (0 = all)")
        ->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--out", bench_out, "report JSON path (stdout when omitted)");
    bench_cmd->callback([&] {
        exit_code = cmd_bench(bench_n, bench_d, bench_rounds, bench_depth, bench_seed,
                              bench_threads, bench_out);
    });

    ModelFlags val_model;
    CLI::App* val_cmd =
        app.add_subcommand("validate", "check every model invariant and print the verdict");
    add_model_flags(val_cmd, val_model);
    val_cmd->callback([&] { exit_code = cmd_validate(val_model); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "glex: error: " << e.what() << '\n';
        return 1;
    } catch (const guard_error& e) {
        std::cerr << "glex: error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "glex: error: " << e.what() << '\n';
        return 1;
    }
    return exit_code;
}
