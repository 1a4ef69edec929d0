#include "symreg/corpus.hpp"

#include <zlib.h>

#include <cstdio>

#include "symreg/errors.hpp"

namespace symreg {

namespace {

bool is_gzip_path(const std::filesystem::path& path) { return path.extension() == ".gz"; }

}  // namespace

class LineWriter {
 public:
  explicit LineWriter(const std::filesystem::path& path) : gz_(is_gzip_path(path)) {
    if (gz_) {
      gz_file_ = gzopen(path.c_str(), "wb6");
      if (!gz_file_) fail(ErrorCode::Io, "cannot open for writing: " + path.string());
    } else {
      file_ = std::fopen(path.c_str(), "wb");
      if (!file_) fail(ErrorCode::Io, "cannot open for writing: " + path.string());
    }
  }
  ~LineWriter() { close(); }

  void write_line(const std::string& line) {
    if (gz_) {
      if (gzwrite(gz_file_, line.data(), static_cast<unsigned>(line.size())) != static_cast<int>(line.size()) ||
          gzputc(gz_file_, '\n') != '\n') {
        fail(ErrorCode::Io, "write failed");
      }
    } else {
      if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fputc('\n', file_) == EOF) {
        fail(ErrorCode::Io, "write failed");
      }
    }
  }

  void close() {
    if (gz_ && gz_file_) {
      const int rc = gzclose(gz_file_);
      gz_file_ = nullptr;
      if (rc != Z_OK) fail(ErrorCode::Io, "close failed");
    } else if (file_) {
      const int rc = std::fclose(file_);
      file_ = nullptr;
      if (rc != 0) fail(ErrorCode::Io, "close failed");
    }
  }

 private:
  bool gz_;
  gzFile gz_file_ = nullptr;
  std::FILE* file_ = nullptr;
};

class LineReader {
 public:
  // gzopen reads uncompressed files transparently.
  explicit LineReader(const std::filesystem::path& path) : file_(gzopen(path.c_str(), "rb")) {
    if (!file_) fail(ErrorCode::Io, "cannot open for reading: " + path.string());
    gzbuffer(file_, 1 << 17);
  }
  ~LineReader() {
    if (file_) gzclose(file_);
  }

  bool read_line(std::string& line) {
    line.clear();
    char buf[1 << 14];
    for (;;) {
      if (!gzgets(file_, buf, sizeof buf)) return !line.empty();
      line += buf;
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        return true;
      }
    }
  }

 private:
  gzFile file_;
};

nlohmann::json record_to_json(const SampleRecord& record, const Vocabulary& vocab) {
  nlohmann::json inputs = nlohmann::json::array();
  for (Eigen::Index i = 0; i < record.points.inputs.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index d = 0; d < record.points.inputs.cols(); ++d) row.push_back(record.points.inputs(i, d));
    inputs.push_back(std::move(row));
  }
  std::vector<int> intervals;
  for (auto iv : record.points.intervals) intervals.push_back(static_cast<int>(iv));
  std::vector<double> outputs(record.points.outputs.data(), record.points.outputs.data() + record.points.outputs.size());
  return nlohmann::json{
      {"index", record.meta.index},
      {"seed", record.meta.seed},
      {"dims", record.meta.dims},
      {"n_ops", record.meta.n_ops},
      {"attempts", record.meta.attempts},
      {"symbols", token_strings(record.tokens, vocab)},
      {"constants", record.tokens.constants},
      {"intervals", intervals},
      {"inputs", std::move(inputs)},
      {"outputs", std::move(outputs)},
  };
}

SampleRecord record_from_json(const nlohmann::json& j, const Vocabulary& vocab) {
  try {
    SampleRecord r;
    r.meta.index = j.at("index").get<std::uint64_t>();
    r.meta.seed = j.value("seed", std::uint64_t{0});
    r.meta.dims = j.at("dims").get<int>();
    r.meta.n_ops = j.value("n_ops", 0);
    r.meta.attempts = j.value("attempts", 0);
    const auto symbols = j.at("symbols").get<std::vector<std::string>>();
    const auto constants = j.at("constants").get<std::vector<double>>();
    r.tokens = sequence_from_strings(symbols, constants, vocab);
    for (int code : j.at("intervals").get<std::vector<int>>()) {
      if (code < 0 || code > 2) fail(ErrorCode::CorpusFormat, "bad interval code");
      r.points.intervals.push_back(static_cast<Interval>(code));
    }
    const auto& inputs = j.at("inputs");
    const auto& outputs = j.at("outputs");
    const auto n = static_cast<Eigen::Index>(outputs.size());
    if (static_cast<Eigen::Index>(inputs.size()) != n) fail(ErrorCode::CorpusFormat, "inputs/outputs size mismatch");
    r.points.inputs.resize(n, r.meta.dims);
    r.points.outputs.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = inputs[static_cast<std::size_t>(i)];
      if (static_cast<int>(row.size()) != r.meta.dims) fail(ErrorCode::CorpusFormat, "input row width mismatch");
      for (int d = 0; d < r.meta.dims; ++d) r.points.inputs(i, d) = row[static_cast<std::size_t>(d)].get<double>();
      r.points.outputs[i] = outputs[static_cast<std::size_t>(i)].get<double>();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorpusFormat, std::string("bad record: ") + e.what());
  }
}

CorpusWriter::CorpusWriter(const std::filesystem::path& path, const CorpusHeader& header, const Vocabulary& vocab)
    : out_(std::make_unique<LineWriter>(path)), vocab_(vocab) {
  nlohmann::json generator = header.generator;
  nlohmann::json h{
      {"format", "symreg-corpus"},
      {"version", header.version},
      {"vocab_hash", header.vocab_hash.empty() ? format_hash(vocab.hash()) : header.vocab_hash},
      {"vocabulary", header.vocabulary.empty() ? std::vector<std::string>{} : header.vocabulary},
      {"count", header.count},
      {"base_seed", header.base_seed},
      {"generator", generator},
  };
  if (header.vocabulary.empty()) {
    std::vector<std::string> tokens;
    for (const auto& t : vocab.tokens()) tokens.push_back(t.text);
    h["vocabulary"] = tokens;
  }
  out_->write_line(h.dump());
}

CorpusWriter::~CorpusWriter() {
  if (!closed_) {
    try {
      abort("writer destroyed before finish()");
    } catch (...) {
    }
  }
}

void CorpusWriter::write(const SampleRecord& record) {
  if (closed_) fail(ErrorCode::Io, "corpus writer already closed");
  try {
    out_->write_line(record_to_json(record, vocab_).dump());
  } catch (const Error&) {
    abort("write failed at record " + std::to_string(written_));
    throw;
  }
  ++written_;
}

void CorpusWriter::finish(const CorpusStats& stats) {
  if (closed_) return;
  nlohmann::json footer{{"footer", true}, {"complete", true}, {"count", written_}, {"stats", stats}};
  out_->write_line(footer.dump());
  closed_ = true;
  out_->close();
}

void CorpusWriter::abort(const std::string& reason) {
  if (closed_) return;
  closed_ = true;
  try {
    nlohmann::json footer{{"footer", true}, {"complete", false}, {"count", written_}, {"error", reason}};
    out_->write_line(footer.dump());
  } catch (...) {
  }
  try {
    out_->close();
  } catch (...) {
  }
}

CorpusReader::CorpusReader(const std::filesystem::path& path) : in_(std::make_unique<LineReader>(path)) {
  std::string line;
  if (!in_->read_line(line)) fail(ErrorCode::CorpusFormat, "empty corpus file: " + path.string());
  try {
    const auto h = nlohmann::json::parse(line);
    if (h.value("format", std::string{}) != "symreg-corpus") fail(ErrorCode::CorpusFormat, "not a corpus file");
    header_.version = h.at("version").get<int>();
    if (header_.version != kCorpusFormatVersion) fail(ErrorCode::CorpusFormat, "unsupported corpus version");
    header_.vocab_hash = h.at("vocab_hash").get<std::string>();
    header_.vocabulary = h.at("vocabulary").get<std::vector<std::string>>();
    header_.count = h.at("count").get<std::uint64_t>();
    header_.base_seed = h.value("base_seed", std::uint64_t{0});
    header_.generator = h.at("generator").get<GeneratorConfig>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorpusFormat, std::string("bad corpus header: ") + e.what());
  }
  vocab_ = Vocabulary::from_tokens(header_.vocabulary);
  if (format_hash(vocab_.hash()) != header_.vocab_hash) fail(ErrorCode::CorpusFormat, "vocabulary hash mismatch");
}

CorpusReader::~CorpusReader() = default;

std::optional<SampleRecord> CorpusReader::next() {
  if (done_) return std::nullopt;
  std::string line;
  for (;;) {
    if (!in_->read_line(line)) {
      done_ = true;
      footer_ = CorpusFooter{false, 0, "missing footer", std::nullopt};
      return std::nullopt;
    }
    if (!line.empty()) break;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorpusFormat, std::string("bad corpus line: ") + e.what());
  }
  if (j.contains("footer")) {
    done_ = true;
    footer_.complete = j.value("complete", false);
    footer_.count = j.value("count", std::uint64_t{0});
    footer_.error = j.value("error", std::string{});
    if (j.contains("stats")) footer_.stats = j.at("stats").get<CorpusStats>();
    return std::nullopt;
  }
  return record_from_json(j, vocab_);
}

Corpus read_corpus(const std::filesystem::path& path) {
  CorpusReader reader(path);
  Corpus corpus;
  corpus.header = reader.header();
  while (auto r = reader.next()) corpus.records.push_back(std::move(*r));
  corpus.footer = reader.footer();
  if (!corpus.footer.complete) {
    fail(ErrorCode::CorpusFormat, "corpus is partial: " + (corpus.footer.error.empty() ? "incomplete" : corpus.footer.error));
  }
  if (corpus.footer.count != corpus.records.size()) fail(ErrorCode::CorpusFormat, "record count mismatch");
  return corpus;
}

CorpusStats write_corpus(const std::filesystem::path& path, const GeneratorConfig& config, std::uint64_t n_records,
                         int n_workers, std::uint64_t base_seed) {
  const Vocabulary vocab = Vocabulary::standard(config.encoding, 2);
  CorpusHeader header;
  header.count = n_records;
  header.base_seed = base_seed;
  header.generator = config;
  CorpusWriter writer(path, header, vocab);
  try {
    auto stats = generate_corpus(config, n_records, n_workers, base_seed, writer);
    writer.finish(stats);
    return stats;
  } catch (const std::exception& e) {
    writer.abort(e.what());
    throw;
  }
}

}  // namespace symreg
