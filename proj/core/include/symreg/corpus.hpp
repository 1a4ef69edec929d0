#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "symreg/datagen.hpp"
#include "symreg/vocabulary.hpp"

namespace symreg {

/// Line-delimited corpus file: one header object, one object per record and
/// a footer carrying generation statistics (or a partial-file marker). Paths
/// ending in ".gz" are gzip-compressed transparently.
inline constexpr int kCorpusFormatVersion = 1;

struct CorpusHeader {
  int version = kCorpusFormatVersion;
  std::string vocab_hash;
  std::vector<std::string> vocabulary;
  std::uint64_t count = 0;
  std::uint64_t base_seed = 0;
  GeneratorConfig generator;
};

struct CorpusFooter {
  bool complete = false;
  std::uint64_t count = 0;
  std::string error;
  std::optional<CorpusStats> stats;
};

nlohmann::json record_to_json(const SampleRecord& record, const Vocabulary& vocab);
SampleRecord record_from_json(const nlohmann::json& j, const Vocabulary& vocab);

class LineWriter;
class LineReader;

class CorpusWriter final : public RecordSink {
 public:
  CorpusWriter(const std::filesystem::path& path, const CorpusHeader& header, const Vocabulary& vocab);
  ~CorpusWriter() override;

  void write(const SampleRecord& record) override;
  /// Writes the completion footer and closes the file.
  void finish(const CorpusStats& stats);
  /// Writes a partial-file marker and closes the file.
  void abort(const std::string& reason);

 private:
  std::unique_ptr<LineWriter> out_;
  const Vocabulary& vocab_;
  std::uint64_t written_ = 0;
  bool closed_ = false;
};

class CorpusReader {
 public:
  explicit CorpusReader(const std::filesystem::path& path);
  ~CorpusReader();

  const CorpusHeader& header() const noexcept { return header_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  /// Next record, or nullopt once the footer has been reached.
  std::optional<SampleRecord> next();
  /// Available after next() returned nullopt.
  const CorpusFooter& footer() const noexcept { return footer_; }

 private:
  std::unique_ptr<LineReader> in_;
  CorpusHeader header_;
  Vocabulary vocab_;
  CorpusFooter footer_;
  bool done_ = false;
};

struct Corpus {
  CorpusHeader header;
  std::vector<SampleRecord> records;
  CorpusFooter footer;
};

/// Reads a whole corpus; throws CorpusFormat when the footer is missing or
/// marks the file partial.
Corpus read_corpus(const std::filesystem::path& path);

/// generate_corpus into a file.
CorpusStats write_corpus(const std::filesystem::path& path, const GeneratorConfig& config, std::uint64_t n_records,
                         int n_workers, std::uint64_t base_seed);

}  // namespace symreg
