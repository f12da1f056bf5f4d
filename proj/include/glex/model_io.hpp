#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glex/model.hpp"

namespace glex {

// Native model document (JSON). parse rejects structural problems with
// parse_error and invariant violations (via validate) with validation_error.
TreeEnsemble parse_model(const std::string& json_text);
std::string serialize_model(const TreeEnsemble& ens);

// Booster dump: a JSON array of recursive node objects (nodeid / split /
// split_condition / yes / no / missing / cover / children / leaf). `yes` is
// the left child and the comparison rule is strict-less-than. A missing
// branch that differs from both children is rejected: such a model is not a
// function of the inputs alone. Feature references are resolved against
// `feature_names`; when empty, names of the form f<k> are required and d is
// inferred as max k + 1 (or `num_features` when given).
TreeEnsemble parse_booster_dump(const std::string& json_text,
                                std::vector<std::string> feature_names,
                                double base_offset,
                                std::optional<int> num_features = std::nullopt);

// CSV with a header row; every cell must parse as a finite number.
Dataset parse_csv(const std::string& text);
Dataset load_csv_file(const std::string& path);

// Shortest round-trip formatting (%.17g) used by all writers.
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// One name per non-empty line.
std::vector<std::string> parse_name_list(const std::string& text);

}  // namespace glex
