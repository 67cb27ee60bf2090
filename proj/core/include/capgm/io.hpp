#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "capgm/inference.hpp"
#include "capgm/model.hpp"
#include "capgm/sampler.hpp"
#include "capgm/simgen.hpp"

namespace capgm {

/// Dataset CSV contract: header row; response in column `y` (optional for
/// test files); an optional integer `group` column; every other column is a
/// numeric predictor unless an explicit list narrows it down.
struct LoadedData {
  Dataset data;
  std::vector<int> group;  // empty when no group column
  std::vector<std::string> predictor_names;
  bool has_y = false;
};

LoadedData load_dataset_csv(const std::string& path,
                            const std::vector<std::string>& predictors = {},
                            const std::string& group_column = "group");

/// Writes y, x1..xP (and optionally group) with full double precision so the
/// file reloads bit-identically.
void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<int>* group = nullptr);

void write_truth_csv(const std::string& path, const SimTruth& truth);

struct TruthLabels {
  std::vector<int> group, dc, oc;
};
TruthLabels load_truth_csv(const std::string& path);

nlohmann::json tree_to_json(const PyramidTree& tree);
PyramidTree tree_from_json(const nlohmann::json& j);

/// Persists one chain under `dir`: trace.csv (iter plus C and G labels),
/// trace.jsonl (tree, D, atoms, weights per kept iteration) and accept.json.
void save_chain_trace(const std::string& dir, const ChainTrace& trace);
ChainTrace load_chain_trace(const std::string& dir);

void write_coclustering_csv(const std::string& path,
                            const CoclusteringMatrix& matrix);

std::string format_double(double v);  // shortest round-trip representation

void ensure_directory(const std::string& path);

}  // namespace capgm
