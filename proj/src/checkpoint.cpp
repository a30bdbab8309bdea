#include "rda/checkpoint.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rda/errors.h"

namespace rda {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'R', 'D', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get() {
    T value;
    read(&value, sizeof(T));
    return value;
  }

  void read(void* dst, std::size_t n) {
    if (n > bytes_.size() - pos_) throw ParseError(pos_, "truncated tensor file");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

NamedTensor matrix_tensor(std::string name, const Matrix& m) {
  return {std::move(name), {m.rows(), m.cols()}, {m.flat().begin(), m.flat().end()}};
}

const NamedTensor* find(const std::vector<NamedTensor>& ts, const std::string& name) {
  auto it = std::find_if(ts.begin(), ts.end(),
                         [&](const NamedTensor& t) { return t.name == name; });
  return it == ts.end() ? nullptr : &*it;
}

void copy_into(Matrix& m, const NamedTensor& t) {
  if (t.shape.size() != 2 || t.shape[0] != m.rows() || t.shape[1] != m.cols()) {
    throw DimensionError("tensor '" + t.name + "' has an unexpected shape");
  }
  std::copy(t.values.begin(), t.values.end(), m.flat().begin());
}

}  // namespace

void write_tensors(const std::filesystem::path& path,
                   const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    std::uint64_t count = 1;
    for (auto d : t.shape) count *= d;
    if (count != t.values.size()) {
      throw DimensionError("tensor '" + t.name + "' shape does not match its values");
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<NamedTensor> read_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

  char magic[4];
  r.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw ParseError(0, "not a named-tensor file");
  }
  if (const auto v = r.get<std::uint32_t>(); v != kVersion) {
    throw ParseError(4, "unsupported version " + std::to_string(v));
  }
  const auto count = r.get<std::uint32_t>();
  std::vector<NamedTensor> tensors(count);
  for (auto& t : tensors) {
    t.name.resize(r.get<std::uint32_t>());
    r.read(t.name.data(), t.name.size());
    t.shape.resize(r.get<std::uint32_t>());
    std::uint64_t n = 1;
    for (auto& d : t.shape) {
      d = r.get<std::uint64_t>();
      n *= d;
    }
    if (n > r.remaining() / sizeof(double)) throw ParseError(r.pos(), "truncated tensor data");
    t.values.resize(n);
    r.read(t.values.data(), n * sizeof(double));
  }
  if (!r.done()) throw ParseError(r.pos(), "trailing bytes after last tensor");
  return tensors;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::vector<NamedTensor> ts;
  if (!params.linear()) ts.push_back(matrix_tensor("hidden_weights", params.hidden_weights));
  ts.push_back(matrix_tensor("class_weights", params.class_weights));
  ts.push_back({"smeasure_head", {params.head.size()}, params.head});
  write_tensors(path, ts);
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  const auto ts = read_tensors(path);
  const NamedTensor* cls = find(ts, "class_weights");
  const NamedTensor* head = find(ts, "smeasure_head");
  if (!cls || !head || cls->shape.size() != 2) {
    throw ParseError(0, "checkpoint lacks class_weights or smeasure_head");
  }
  const NamedTensor* hidden = find(ts, "hidden_weights");
  const std::size_t k = cls->shape[1];
  ModelParams p;
  if (hidden) {
    if (hidden->shape.size() != 2) throw ParseError(0, "hidden_weights must be 2-D");
    p = zero_params(hidden->shape[0] - 1, k, hidden->shape[1]);
    copy_into(p.hidden_weights, *hidden);
  } else {
    p = zero_params(cls->shape[0] - 1, k, 0);
  }
  copy_into(p.class_weights, *cls);
  if (head->values.size() != p.rep_dim()) {
    throw DimensionError("smeasure_head length does not match the representation");
  }
  p.head = head->values;
  return p;
}

}  // namespace rda
