#include "rda/datagen.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <string_view>

#include "rda/errors.h"

namespace rda {

int LabeledDataset::num_classes() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

ShapePartition LabeledDataset::partition() const {
  ShapePartition p;
  for (std::size_t i = 0; i < size_label.size(); ++i) {
    (size_label[i] > 0 ? p.positive : p.negative).push_back(i);
  }
  return p;
}

void GenSpec::validate() const {
  if (dim == 0) throw ConfigError("data.dim", "must be positive");
  if (num_classes < 2) throw ConfigError("data.classes", "must be at least 2");
  if (num_classes > num_samples) throw ConfigError("data.classes", "exceeds data.samples");
  for (double s : size_stds) {
    if (!(s > 0.0)) throw ConfigError("data.size_stds", "must be positive");
  }
  if (!(mixture_weight > 0.0 && mixture_weight < 1.0)) {
    throw ConfigError("data.mixture_weight", "must lie in (0, 1)");
  }
  if (!(size_class_correlation >= 0.0 && size_class_correlation <= 1.0)) {
    throw ConfigError("data.size_class_correlation", "must lie in [0, 1]");
  }
  if (!(label_noise >= 0.0 && label_noise < 0.5)) {
    throw ConfigError("data.label_noise", "must lie in [0, 0.5)");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("data.noise_std", "must be nonnegative");
  if (!std::isfinite(separation) || !std::isfinite(size_shift)) {
    throw ConfigError("data.separation", "must be finite");
  }
}

namespace {

// k + 1 unit directions; orthonormal as long as the dimension allows.
std::vector<std::vector<double>> directions(std::mt19937_64& rng, std::size_t count,
                                            std::size_t dim) {
  std::normal_distribution<double> gauss;
  std::vector<std::vector<double>> out;
  while (out.size() < count) {
    std::vector<double> v(dim);
    for (double& x : v) x = gauss(rng);
    if (out.size() < dim) {
      for (const auto& q : out) {
        const double c = dot(v, q);
        for (std::size_t i = 0; i < dim; ++i) v[i] -= c * q[i];
      }
    }
    const double norm = std::sqrt(dot(v, v));
    if (norm < 1e-8) continue;
    for (double& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::vector<double>> scaled_centers(std::mt19937_64& rng, const GenSpec& spec,
                                                std::vector<double>& size_dir) {
  auto dirs = directions(rng, spec.num_classes + 1, spec.dim);
  size_dir = dirs.back();
  dirs.pop_back();
  for (auto& c : dirs) {
    for (double& x : c) x *= spec.separation;
  }
  return dirs;
}

}  // namespace

std::vector<std::vector<double>> class_centers(const GenSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<double> u;
  return scaled_centers(rng, spec, u);
}

LabeledDataset generate(const GenSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::size_t d = spec.dim, k = spec.num_classes, n = spec.num_samples;
  std::vector<double> u;
  const auto dirs = scaled_centers(rng, spec, u);
  const double mid = 0.5 * (spec.size_means[0] + spec.size_means[1]);

  std::uniform_int_distribution<std::size_t> pick_class(0, k - 1);
  std::uniform_int_distribution<std::size_t> pick_other(1, k - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;

  LabeledDataset data;
  data.features = Matrix(n, d);
  data.labels.resize(n);
  data.raw_size.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const int comp = unit(rng) < spec.mixture_weight ? 1 : 0;
    std::size_t y0 = pick_class(rng);
    if (unit(rng) < spec.size_class_correlation) {
      // Clusters of parity comp: comp, comp + 2, ...
      const std::size_t count = (k - static_cast<std::size_t>(comp) + 1) / 2;
      y0 = static_cast<std::size_t>(comp) +
           2 * std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
    }
    const double s = spec.size_means[comp] + spec.size_stds[comp] * gauss(rng);
    data.raw_size[r] = s;

    auto x = data.features.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = s * dirs[y0][i] + spec.size_shift * (s - mid) * u[i] + spec.noise_std * gauss(rng);
    }
    std::size_t label = 0;
    double best = -INFINITY;
    for (std::size_t j = 0; j < k; ++j) {
      const double score = dot(x, dirs[j]);
      if (score > best) {
        best = score;
        label = j;
      }
    }
    if (unit(rng) < spec.label_noise) label = (label + pick_other(rng)) % k;
    data.labels[r] = static_cast<int>(label);
  }
  data.threshold = size_threshold(data.raw_size, spec.threshold);
  data.size_label = binarize_size(data.raw_size, data.threshold);
  return data;
}

double size_threshold(std::span<const double> raw_size, const ThresholdPolicy& policy) {
  if (policy.kind == ThresholdPolicy::Kind::fixed) return policy.value;
  if (raw_size.empty()) throw InvalidInputError("binarize_size: empty input");
  double sum = 0.0;
  for (double s : raw_size) sum += s;
  return sum / static_cast<double>(raw_size.size());
}

std::vector<int> binarize_size(std::span<const double> raw_size, double threshold) {
  if (raw_size.empty()) throw InvalidInputError("binarize_size: empty input");
  std::vector<int> out(raw_size.size());
  std::transform(raw_size.begin(), raw_size.end(), out.begin(),
                 [threshold](double s) { return s > threshold ? 1 : -1; });
  return out;
}

std::vector<int> binarize_size(std::span<const double> raw_size) {
  return binarize_size(raw_size, size_threshold(raw_size, {}));
}

std::pair<LabeledDataset, LabeledDataset> split_tail(const LabeledDataset& data,
                                                     std::size_t test_count) {
  if (test_count >= data.size()) throw InvalidInputError("split_tail: nothing left to train on");
  const std::size_t cut = data.size() - test_count;
  auto slice = [&](std::size_t lo, std::size_t hi) {
    LabeledDataset part;
    part.features = Matrix(hi - lo, data.dim());
    for (std::size_t r = lo; r < hi; ++r) {
      std::copy(data.features.row(r).begin(), data.features.row(r).end(),
                part.features.row(r - lo).begin());
    }
    const auto lo_i = static_cast<std::ptrdiff_t>(lo), hi_i = static_cast<std::ptrdiff_t>(hi);
    part.labels.assign(data.labels.begin() + lo_i, data.labels.begin() + hi_i);
    part.raw_size.assign(data.raw_size.begin() + lo_i, data.raw_size.begin() + hi_i);
    part.size_label.assign(data.size_label.begin() + lo_i, data.size_label.begin() + hi_i);
    part.threshold = data.threshold;
    return part;
  };
  return {slice(0, cut), slice(cut, data.size())};
}

// ---------------------------------------------------------------------------

namespace {

void append_real(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  line.append(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line, const char* what) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

void save_csv(const LabeledDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  std::string line;
  for (std::size_t i = 0; i < data.dim(); ++i) line += "f" + std::to_string(i) + ",";
  line += "label,raw_size\n";
  out << line;
  for (std::size_t r = 0; r < data.size(); ++r) {
    line.clear();
    for (double v : data.features.row(r)) {
      append_real(line, v);
      line += ',';
    }
    line += std::to_string(data.labels[r]);
    line += ',';
    append_real(line, data.raw_size[r]);
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

LabeledDataset load_csv(const std::filesystem::path& path, const ThresholdPolicy& policy) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 3 || header[header.size() - 2] != "label" ||
      header.back() != "raw_size") {
    throw ParseError(1, "header must be f0..f{d-1},label,raw_size");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t i = 0; i < d; ++i) {
    if (header[i] != "f" + std::to_string(i)) {
      throw ParseError(1, "expected column f" + std::to_string(i));
    }
  }

  std::vector<double> features;
  LabeledDataset data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != d + 2) {
      throw ParseError(lineno, "expected " + std::to_string(d + 2) + " columns, found " +
                                   std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < d; ++i) {
      features.push_back(parse_field<double>(fields[i], lineno, "feature"));
    }
    const int label = parse_field<int>(fields[d], lineno, "label");
    if (label < 0) throw ParseError(lineno, "negative label");
    data.labels.push_back(label);
    data.raw_size.push_back(parse_field<double>(fields[d + 1], lineno, "raw_size"));
  }
  if (data.labels.empty()) throw EmptyDatasetError(path.string() + " has no data rows");

  data.features = Matrix(data.labels.size(), d);
  std::copy(features.begin(), features.end(), data.features.flat().begin());
  data.threshold = size_threshold(data.raw_size, policy);
  data.size_label = binarize_size(data.raw_size, data.threshold);
  return data;
}

}  // namespace rda
