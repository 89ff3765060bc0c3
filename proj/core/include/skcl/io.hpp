#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skcl/gmm.hpp"
#include "skcl/sketch.hpp"
#include "skcl/types.hpp"

namespace skcl {

// Binary dataset: "SKCLDATA", u32 version=1, u64 N, u64 T, then N*T little-endian
// float64 values, one sample after another.
void write_dataset(const std::filesystem::path& path, const DataMatrix& data);
DataMatrix read_dataset(const std::filesystem::path& path);

// CSV with one sample per row; blank lines and lines starting with '#' are skipped.
DataMatrix read_csv_dataset(const std::filesystem::path& path);

// Binary when the file starts with the dataset magic, CSV otherwise.
DataMatrix load_dataset(const std::filesystem::path& path);

// JSON sketch file {"magic":"SKCL-SK","version":1,...}.
std::string sketch_to_json(const Sketch& sketch);
Sketch sketch_from_json(const std::string& text);
void write_sketch(const std::filesystem::path& path, const Sketch& sketch);
Sketch read_sketch(const std::filesystem::path& path);

struct CentroidFile {
  Centroids centroids;
  // present when the centroids came from the sketch engine
  std::optional<GmmHyperparams> hyper;
};

void write_centroids(const std::filesystem::path& path, const CentroidFile& file);
CentroidFile read_centroids(const std::filesystem::path& path);

// Ground truth of a synthetic dataset: true means and labels.
struct TruthFile {
  Centroids means;
  std::vector<Index> train_labels;
  std::vector<Index> test_labels;
};

void write_truth(const std::filesystem::path& path, const TruthFile& truth);
TruthFile read_truth(const std::filesystem::path& path);

}  // namespace skcl
