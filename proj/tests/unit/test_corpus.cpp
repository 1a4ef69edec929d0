#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "symreg/corpus.hpp"
#include "test_util.hpp"

using namespace symreg;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "symreg_unit";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("write and read back, plain and compressed") {
    auto c = GeneratorConfig::defaults(1);
    c.max_operators = 5;
    for (const char* name : {"small.jsonl", "small.jsonl.gz"}) {
      const auto path = temp_path(name);
      const auto stats = write_corpus(path, c, 40, 2, 123);
      const Corpus corpus = read_corpus(path);
      CHECK(corpus.records.size() == 40);
      CHECK(corpus.header.count == 40);
      CHECK(corpus.header.base_seed == 123);
      CHECK(corpus.header.vocab_hash == format_hash(Vocabulary::standard(EncodingMode::Extended, 2).hash()));
      CHECK(corpus.footer.complete);
      REQUIRE(corpus.footer.stats.has_value());
      CHECK(corpus.footer.stats->records == stats.records);
      Generator g(c);
      for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        const auto again = g.generate(i, derive_seed(123, i));
        CHECK(corpus.records[i].tokens.symbols == again.tokens.symbols);
        CHECK(corpus.records[i].tokens.constants == again.tokens.constants);
        CHECK(corpus.records[i].points.inputs == again.points.inputs);
        CHECK(corpus.records[i].points.outputs == again.points.outputs);
        CHECK(corpus.records[i].points.intervals == again.points.intervals);
      }
    }
  }

  TEST_CASE("byte-identical across worker counts") {
    const auto c = GeneratorConfig::defaults(2);
    write_corpus(temp_path("w1.jsonl"), c, 30, 1, 5);
    write_corpus(temp_path("w3.jsonl"), c, 30, 3, 5);
    CHECK(slurp(temp_path("w1.jsonl")) == slurp(temp_path("w3.jsonl")));
  }

  TEST_CASE("empty corpus has a valid header") {
    const auto path = temp_path("empty.jsonl");
    write_corpus(path, GeneratorConfig::defaults(1), 0, 1, 1);
    const Corpus corpus = read_corpus(path);
    CHECK(corpus.records.empty());
    CHECK(corpus.header.version == kCorpusFormatVersion);
    CHECK(corpus.footer.complete);
  }

  TEST_CASE("partial files are rejected") {
    const auto path = temp_path("partial.jsonl");
    {
      const auto vocab = Vocabulary::standard(EncodingMode::Extended, 2);
      CorpusHeader h;
      h.vocab_hash = format_hash(vocab.hash());
      for (const auto& t : vocab.tokens()) h.vocabulary.push_back(t.text);
      h.count = 2;
      h.generator = GeneratorConfig::defaults(1);
      CorpusWriter w(path, h, vocab);
      Generator g(h.generator);
      w.write(g.generate(0, 1));
      w.abort("disk full");
    }
    CHECK_THROWS_CODE(read_corpus(path), ErrorCode::CorpusFormat);
    // Truncation drops the footer entirely.
    write_corpus(temp_path("whole.jsonl"), GeneratorConfig::defaults(1), 5, 1, 3);
    const std::string text = slurp(temp_path("whole.jsonl"));
    const auto cut = text.rfind('\n', text.size() - 2) + 1;
    CHECK(text.substr(cut).find("footer") != std::string::npos);
    std::ofstream(temp_path("truncated.jsonl"), std::ios::binary) << text.substr(0, cut);
    CHECK_THROWS_CODE(read_corpus(temp_path("truncated.jsonl")), ErrorCode::CorpusFormat);
    CHECK_THROWS_CODE(read_corpus(temp_path("missing.jsonl")), ErrorCode::Io);
  }

  TEST_CASE("record json carries every field") {
    Generator g(GeneratorConfig::defaults(1));
    const auto rec = g.generate(7, 99);
    const auto j = record_to_json(rec, g.vocabulary());
    for (const char* key : {"index", "dims", "symbols", "constants", "intervals", "inputs", "outputs"}) {
      CHECK_MESSAGE(j.contains(key), key);
    }
    const auto back = record_from_json(j, g.vocabulary());
    CHECK(back.tokens == rec.tokens);
    CHECK(back.points.outputs == rec.points.outputs);
    CHECK(back.meta.index == 7);
  }
}
