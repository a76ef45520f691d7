#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corrlda/vocabulary.hpp"

namespace corrlda {

struct BowEntry {
    std::size_t word = 0;
    std::size_t count = 0;

    bool operator==(const BowEntry&) const = default;
};

// Sparse count vector. Entries are kept sorted by word index with no
// duplicates; total caches the sum of counts.
struct BowVector {
    std::vector<BowEntry> entries;
    std::size_t total = 0;

    // Sorts by word index and validates counts ≥ 1 and distinct words.
    static BowVector from_entries(std::vector<BowEntry> entries);

    // Checks the sorted/distinct/count invariants against a vocabulary size.
    void validate(std::size_t vocab_size) const;

    bool operator==(const BowVector&) const = default;
};

struct Document {
    std::string id;
    BowVector sensory;
    std::vector<std::size_t> caption; // text-word indices, may be empty
    std::optional<std::string> category;

    void validate(std::size_t sensory_vocab_size, std::size_t text_vocab_size) const;

    bool operator==(const Document&) const = default;
};

// Documents plus the two dictionaries they index into. Construction
// validates every document and id uniqueness.
class Corpus {
public:
    Corpus(std::vector<Document> documents, Vocabulary sensory_vocab, Vocabulary text_vocab);

    const std::vector<Document>& documents() const { return documents_; }
    const Document& doc(std::size_t i) const { return documents_.at(i); }
    std::size_t size() const { return documents_.size(); }
    const Vocabulary& sensory_vocab() const { return sensory_vocab_; }
    const Vocabulary& text_vocab() const { return text_vocab_; }

private:
    std::vector<Document> documents_;
    Vocabulary sensory_vocab_;
    Vocabulary text_vocab_;
};

// JSON-lines reader. Each line must be an object with exactly the fields
// id, sensory, caption, category; errors carry the offending line number.
Corpus load_corpus(const std::filesystem::path& path, const Vocabulary& sensory_vocab,
                   const Vocabulary& text_vocab);

// Canonical single-line serialization: minified JSON, field order
// id/sensory/caption/category, sensory keys in ascending numeric order.
std::string corpus_line(const Document& doc, const Vocabulary& text_vocab);

void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Deterministic holdout split: round(test_fraction * N) documents go to the
// second part, chosen by seeded shuffle; each part keeps corpus order.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_fraction,
                                       std::uint64_t seed);

} // namespace corrlda
