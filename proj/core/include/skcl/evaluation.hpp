#pragma once

#include <string>
#include <vector>

#include "skcl/types.hpp"

namespace skcl {

struct ClassificationScore {
  double error_rate = 0.0;
  double bayes_rate = 0.0;
  // estimated cluster k is matched to true cluster matching[k]
  std::vector<Index> matching;
};

// Minimum-distance classification of the test set with the estimated centroids,
// label matching by the Hungarian algorithm on negative agreement counts, and the
// Bayes-rate estimate from classifying with the true means.
ClassificationScore classify_and_score(const DataMatrix& test, const std::vector<Index>& true_labels,
                                       const Centroids& centroids, const Centroids& true_means);

// One benchmark/evaluation result, serialized as a CSV row.
struct EvalReport {
  std::string algorithm;
  Index k = 0;
  Index n = 0;
  Index t = 0;
  double m_or_rate = 0.0;
  int replicates = 0;
  double sse = 0.0;
  double error_rate = 0.0;
  double bayes_rate = 0.0;
  double runtime_seconds = 0.0;
  double sketch_seconds = 0.0;
  // trial seed, or a statistic name ("median", "std") for summary rows
  std::string seed;
};

inline constexpr const char* kReportHeader =
    "algorithm,k,n,t,m_or_rate,replicates,sse,error_rate,bayes_rate,runtime_seconds,sketch_seconds,seed";

std::string to_csv_row(const EvalReport& report);
EvalReport parse_csv_row(const std::string& line);

}  // namespace skcl
