#include "skcl/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace skcl {

namespace {

using nlohmann::json;

constexpr std::array<char, 8> kDatasetMagic = {'S', 'K', 'C', 'L', 'D', 'A', 'T', 'A'};
constexpr std::uint32_t kDatasetVersion = 1;
constexpr const char* kSketchMagic = "SKCL-SK";
constexpr const char* kCentroidMagic = "SKCL-CE";
constexpr const char* kTruthMagic = "SKCL-TR";
constexpr int kFileVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw Error("unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error("malformed " + what + ": " + e.what());
  }
}

void expect_header(const json& doc, const char* magic, const std::string& what) {
  if (!doc.is_object() || !doc.contains("magic") || doc["magic"] != magic) {
    throw Error(what + ": bad magic (expected " + magic + ")");
  }
  if (!doc.contains("version") || doc["version"] != kFileVersion) throw Error(what + ": unsupported version");
}

json columns_to_json(const Matrix& m) {
  json cols = json::array();
  for (Index k = 0; k < m.cols(); ++k) {
    std::vector<double> col(m.col(k).data(), m.col(k).data() + m.rows());
    cols.push_back(col);
  }
  return cols;
}

Matrix columns_from_json(const json& cols, Index rows, Index count, const std::string& what) {
  if (!cols.is_array() || static_cast<Index>(cols.size()) != count) throw Error(what + ": wrong column count");
  Matrix m(rows, count);
  for (Index k = 0; k < count; ++k) {
    const auto col = cols[k].get<std::vector<double>>();
    if (static_cast<Index>(col.size()) != rows) throw Error(what + ": wrong column length");
    for (Index n = 0; n < rows; ++n) m(n, k) = col[n];
  }
  return m;
}

json double_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

}  // namespace

void write_dataset(const std::filesystem::path& path, const DataMatrix& data) {
  std::ofstream out = open_out(path, std::ios::binary);
  out.write(kDatasetMagic.data(), kDatasetMagic.size());
  put_le<std::uint32_t>(out, kDatasetVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(data.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(data.cols()));
  // column-major storage is already one sample after another
  for (Index i = 0; i < data.size(); ++i) put_le<double>(out, data.data()[i]);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

DataMatrix read_dataset(const std::filesystem::path& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size())) throw Error("unexpected end of file");
  if (magic != kDatasetMagic) throw Error("'" + path.string() + "' is not an SKCLDATA file (bad magic)");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kDatasetVersion) throw Error("unsupported version " + std::to_string(version));
  const auto rows = get_le<std::uint64_t>(in);
  const auto cols = get_le<std::uint64_t>(in);
  if (rows == 0 || cols == 0) throw Error("dataset header declares an empty matrix");
  if (rows > (std::uint64_t{1} << 40) / cols) throw Error("dataset header declares an implausible size");
  DataMatrix data(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < data.size(); ++i) data.data()[i] = get_le<double>(in);
  return data;
}

DataMatrix read_csv_dataset(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<double> values;
  Index dim = -1;
  Index samples = 0;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream row(line);
    std::string cell;
    Index count = 0;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw Error("csv line " + std::to_string(line_no) + ": cannot parse '" + cell + "'");
      }
      ++count;
    }
    if (dim < 0) dim = count;
    if (count != dim) throw Error("csv line " + std::to_string(line_no) + ": expected " + std::to_string(dim) + " values");
    ++samples;
  }
  if (samples == 0) throw Error("csv file '" + path.string() + "' has no samples");
  DataMatrix data = Eigen::Map<DataMatrix>(values.data(), dim, samples);
  validate_data(data);
  return data;
}

DataMatrix load_dataset(const std::filesystem::path& path) {
  std::array<char, 8> magic{};
  {
    std::ifstream in = open_in(path, std::ios::binary);
    in.read(magic.data(), magic.size());
    if (in.gcount() == static_cast<std::streamsize>(magic.size()) && magic == kDatasetMagic) return read_dataset(path);
  }
  return read_csv_dataset(path);
}

std::string sketch_to_json(const Sketch& sketch) {
  json doc;
  doc["magic"] = kSketchMagic;
  doc["version"] = kFileVersion;
  doc["m"] = sketch.size();
  doc["n"] = sketch.dim();
  doc["t"] = sketch.sample_count;
  doc["seed"] = sketch.frequencies.seed;
  doc["radius_law"] = std::string(to_string(sketch.frequencies.law));
  doc["scale"] = sketch.frequencies.scale;
  std::vector<double> re(sketch.size()), im(sketch.size());
  for (Index m = 0; m < sketch.size(); ++m) {
    re[m] = sketch.values[m].real();
    im[m] = sketch.values[m].imag();
  }
  doc["y_re"] = re;
  doc["y_im"] = im;
  return doc.dump();
}

Sketch sketch_from_json(const std::string& text) {
  const json doc = parse_json(text, "sketch file");
  expect_header(doc, kSketchMagic, "sketch file");
  try {
    Sketch sketch;
    const auto m = doc.at("m").get<Index>();
    sketch.frequencies.count = m;
    sketch.frequencies.dim = doc.at("n").get<Index>();
    sketch.sample_count = doc.at("t").get<Index>();
    sketch.frequencies.seed = doc.at("seed").get<std::uint64_t>();
    sketch.frequencies.law = parse_radius_law(doc.at("radius_law").get<std::string>());
    sketch.frequencies.scale = doc.at("scale").get<double>();
    const auto re = doc.at("y_re").get<std::vector<double>>();
    const auto im = doc.at("y_im").get<std::vector<double>>();
    if (static_cast<Index>(re.size()) != m || static_cast<Index>(im.size()) != m) {
      throw Error("sketch file: y_re/y_im length does not match m");
    }
    if (m < 1 || sketch.frequencies.dim < 1) throw Error("sketch file: m and n must be positive");
    sketch.values.resize(m);
    for (Index i = 0; i < m; ++i) sketch.values[i] = Complex(re[i], im[i]);
    return sketch;
  } catch (const json::exception& e) {
    throw Error(std::string("sketch file: ") + e.what());
  }
}

void write_sketch(const std::filesystem::path& path, const Sketch& sketch) {
  std::ofstream out = open_out(path);
  out << sketch_to_json(sketch) << '\n';
}

Sketch read_sketch(const std::filesystem::path& path) { return sketch_from_json(slurp(path)); }

void write_centroids(const std::filesystem::path& path, const CentroidFile& file) {
  json doc;
  doc["magic"] = kCentroidMagic;
  doc["version"] = kFileVersion;
  doc["n"] = file.centroids.rows();
  doc["k"] = file.centroids.cols();
  doc["centroids"] = columns_to_json(file.centroids);
  if (file.hyper) {
    doc["alpha"] = std::vector<double>(file.hyper->alpha.data(), file.hyper->alpha.data() + file.hyper->alpha.size());
    doc["tau"] = std::vector<double>(file.hyper->tau.data(), file.hyper->tau.data() + file.hyper->tau.size());
    doc["nu"] = double_or_null(file.hyper->nu);
  }
  std::ofstream out = open_out(path);
  out << doc.dump(1) << '\n';
}

CentroidFile read_centroids(const std::filesystem::path& path) {
  const json doc = parse_json(slurp(path), "centroid file");
  expect_header(doc, kCentroidMagic, "centroid file");
  try {
    CentroidFile file;
    const auto n = doc.at("n").get<Index>();
    const auto k = doc.at("k").get<Index>();
    file.centroids = columns_from_json(doc.at("centroids"), n, k, "centroid file");
    if (doc.contains("alpha")) {
      GmmHyperparams hyper;
      const auto alpha = doc.at("alpha").get<std::vector<double>>();
      const auto tau = doc.at("tau").get<std::vector<double>>();
      hyper.alpha = Eigen::Map<const Vector>(alpha.data(), static_cast<Index>(alpha.size()));
      hyper.tau = Eigen::Map<const Vector>(tau.data(), static_cast<Index>(tau.size()));
      hyper.nu = doc.at("nu").is_null() ? std::numeric_limits<double>::infinity() : doc.at("nu").get<double>();
      file.hyper = hyper;
    }
    return file;
  } catch (const json::exception& e) {
    throw Error(std::string("centroid file: ") + e.what());
  }
}

void write_truth(const std::filesystem::path& path, const TruthFile& truth) {
  json doc;
  doc["magic"] = kTruthMagic;
  doc["version"] = kFileVersion;
  doc["n"] = truth.means.rows();
  doc["k"] = truth.means.cols();
  doc["means"] = columns_to_json(truth.means);
  doc["train_labels"] = truth.train_labels;
  doc["test_labels"] = truth.test_labels;
  std::ofstream out = open_out(path);
  out << doc.dump() << '\n';
}

TruthFile read_truth(const std::filesystem::path& path) {
  const json doc = parse_json(slurp(path), "truth file");
  expect_header(doc, kTruthMagic, "truth file");
  try {
    TruthFile truth;
    truth.means = columns_from_json(doc.at("means"), doc.at("n").get<Index>(), doc.at("k").get<Index>(), "truth file");
    truth.train_labels = doc.at("train_labels").get<std::vector<Index>>();
    truth.test_labels = doc.at("test_labels").get<std::vector<Index>>();
    return truth;
  } catch (const json::exception& e) {
    throw Error(std::string("truth file: ") + e.what());
  }
}

}  // namespace skcl
