#include "skcl/evaluation.hpp"

#include <sstream>

#include "skcl/hungarian.hpp"
#include "skcl/kmeans.hpp"

namespace skcl {

ClassificationScore classify_and_score(const DataMatrix& test, const std::vector<Index>& true_labels,
                                       const Centroids& centroids, const Centroids& true_means) {
  if (static_cast<Index>(true_labels.size()) != test.cols()) throw Error("classify: label count does not match test set");
  if (centroids.cols() != true_means.cols()) throw Error("classify: estimated and true K differ");
  if (centroids.rows() != test.rows() || true_means.rows() != test.rows()) throw Error("classify: dimension mismatch");
  if (test.cols() == 0) throw Error("classify: empty test set");

  const Index clusters = centroids.cols();
  for (Index label : true_labels) {
    if (label < 0 || label >= clusters) throw Error("classify: true label out of range");
  }

  const std::vector<Index> estimated = assign_nearest(test, centroids);
  const std::vector<Index> bayes = assign_nearest(test, true_means);

  Matrix agreement = Matrix::Zero(clusters, clusters);
  Index bayes_errors = 0;
  for (std::size_t t = 0; t < true_labels.size(); ++t) {
    agreement(estimated[t], true_labels[t]) += 1.0;
    bayes_errors += bayes[t] != true_labels[t] ? 1 : 0;
  }

  ClassificationScore score;
  score.matching = hungarian(-agreement);
  const double matched = -assignment_cost(-agreement, score.matching);
  const auto total = static_cast<double>(test.cols());
  score.error_rate = 1.0 - matched / total;
  score.bayes_rate = static_cast<double>(bayes_errors) / total;
  return score;
}

std::string to_csv_row(const EvalReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << r.algorithm << ',' << r.k << ',' << r.n << ',' << r.t << ',' << r.m_or_rate << ',' << r.replicates << ','
      << r.sse << ',' << r.error_rate << ',' << r.bayes_rate << ',' << r.runtime_seconds << ',' << r.sketch_seconds
      << ',' << r.seed;
  return out.str();
}

EvalReport parse_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (fields.size() != 12) throw Error("report row must have 12 fields, got " + std::to_string(fields.size()));
  auto num = [](const std::string& s) { return std::stod(s); };
  EvalReport r;
  r.algorithm = fields[0];
  r.k = std::stoll(fields[1]);
  r.n = std::stoll(fields[2]);
  r.t = std::stoll(fields[3]);
  r.m_or_rate = num(fields[4]);
  r.replicates = std::stoi(fields[5]);
  r.sse = num(fields[6]);
  r.error_rate = num(fields[7]);
  r.bayes_rate = num(fields[8]);
  r.runtime_seconds = num(fields[9]);
  r.sketch_seconds = num(fields[10]);
  r.seed = fields[11];
  return r;
}

}  // namespace skcl
