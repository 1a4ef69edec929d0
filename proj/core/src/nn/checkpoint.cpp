#include "symreg/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "symreg/errors.hpp"

namespace symreg::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'Y', 'M', 'R', 'G', 'C', 'K', 'P'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) fail(ErrorCode::Io, "cannot open for writing: " + path.string());
  }
  template <class U>
  void pod(U v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void tensors(const std::vector<NamedTensor>& ts) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(ts.size()));
    for (const auto& t : ts) {
      str(t.name);
      pod<std::int32_t>(t.rows);
      pod<std::int32_t>(t.cols);
      out_.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * 4));
    }
  }
  void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void close() {
    out_.flush();
    if (!out_) fail(ErrorCode::Io, "checkpoint write failed");
    out_.close();
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) fail(ErrorCode::Io, "cannot open for reading: " + path.string());
  }
  template <class U>
  U pod() {
    U v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in_) fail(ErrorCode::Checkpoint, "truncated checkpoint");
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    if (n > (1u << 30)) fail(ErrorCode::Checkpoint, "implausible string length in checkpoint");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) fail(ErrorCode::Checkpoint, "truncated checkpoint");
    return s;
  }
  std::vector<NamedTensor> tensors() {
    const auto n = pod<std::uint32_t>();
    std::vector<NamedTensor> ts(n);
    for (auto& t : ts) {
      t.name = str();
      t.rows = pod<std::int32_t>();
      t.cols = pod<std::int32_t>();
      if (t.rows < 0 || t.cols < 0 || static_cast<std::int64_t>(t.rows) * t.cols > (1ll << 31)) {
        fail(ErrorCode::Checkpoint, "bad tensor shape in checkpoint");
      }
      t.data.resize(static_cast<std::size_t>(t.rows) * static_cast<std::size_t>(t.cols));
      in_.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * 4));
      if (!in_) fail(ErrorCode::Checkpoint, "truncated checkpoint");
    }
    return ts;
  }
  void raw(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (!in_) fail(ErrorCode::Checkpoint, "truncated checkpoint");
  }

 private:
  std::ifstream in_;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  auto tmp = path;
  tmp += ".tmp";
  {
    Writer w(tmp);
    w.raw(kMagic, sizeof kMagic);
    w.pod<std::uint32_t>(kCheckpointVersion);
    w.str(nlohmann::json(ckpt.config).dump());
    w.str(ckpt.vocab_hash);
    w.tensors(ckpt.parameters);
    w.tensors(ckpt.adam_m);
    w.tensors(ckpt.adam_v);
    w.pod<std::uint64_t>(ckpt.step);
    w.str(ckpt.rng_state);
    w.str(ckpt.train_state.dump());
    w.close();
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::Io, "cannot move checkpoint into place: " + ec.message());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  char magic[sizeof kMagic];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) fail(ErrorCode::Checkpoint, "not a checkpoint: " + path.string());
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) fail(ErrorCode::Checkpoint, "unsupported checkpoint version");
  Checkpoint c;
  try {
    c.config = nlohmann::json::parse(r.str()).get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Checkpoint, std::string("bad model config in checkpoint: ") + e.what());
  }
  c.vocab_hash = r.str();
  c.parameters = r.tensors();
  c.adam_m = r.tensors();
  c.adam_v = r.tensors();
  c.step = r.pod<std::uint64_t>();
  c.rng_state = r.str();
  try {
    c.train_state = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Checkpoint, std::string("bad train state in checkpoint: ") + e.what());
  }
  return c;
}

template <class T>
std::vector<NamedTensor> export_parameters(const Model<T>& model) {
  std::vector<NamedTensor> out;
  for (const auto* p : model.params().all()) {
    NamedTensor t{p->name, p->value.rows, p->value.cols, {}};
    t.data.reserve(p->value.size());
    for (T v : p->value.data) t.data.push_back(static_cast<float>(v));
    out.push_back(std::move(t));
  }
  return out;
}

template <class T>
void import_parameters(Model<T>& model, const std::vector<NamedTensor>& tensors) {
  auto params = model.params().all();
  if (params.size() != tensors.size()) fail(ErrorCode::Checkpoint, "parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = tensors[i];
    auto& p = *params[i];
    if (t.name != p.name || t.rows != p.value.rows || t.cols != p.value.cols) {
      fail(ErrorCode::Checkpoint, "parameter mismatch at " + p.name);
    }
    for (std::size_t k = 0; k < t.data.size(); ++k) p.value.data[k] = static_cast<T>(t.data[k]);
  }
}

template <class T>
std::unique_ptr<Model<T>> load_model(const std::filesystem::path& path, const Vocabulary& vocab) {
  const Checkpoint c = read_checkpoint(path);
  if (c.vocab_hash != format_hash(vocab.hash())) fail(ErrorCode::Checkpoint, "checkpoint vocabulary mismatch");
  auto model = std::make_unique<Model<T>>(c.config, 0);
  import_parameters(*model, c.parameters);
  return model;
}

template std::vector<NamedTensor> export_parameters(const Model<float>&);
template std::vector<NamedTensor> export_parameters(const Model<double>&);
template void import_parameters(Model<float>&, const std::vector<NamedTensor>&);
template void import_parameters(Model<double>&, const std::vector<NamedTensor>&);
template std::unique_ptr<Model<float>> load_model(const std::filesystem::path&, const Vocabulary&);
template std::unique_ptr<Model<double>> load_model(const std::filesystem::path&, const Vocabulary&);

}  // namespace symreg::nn
