#include "corrlda/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "json.hpp"

#include "corrlda/errors.hpp"
#include "corrlda/rng.hpp"

namespace corrlda {

namespace {

// Accepts only the canonical decimal rendering of an index, so "01" cannot
// alias "1" inside a sensory object.
std::optional<std::size_t> parse_canonical_index(const std::string& key) {
    if (key.empty() || (key.size() > 1 && key[0] == '0')) return std::nullopt;
    std::size_t value = 0;
    for (char c : key) {
        if (c < '0' || c > '9') return std::nullopt;
        if (value > (std::numeric_limits<std::size_t>::max() - (c - '0')) / 10) return std::nullopt;
        value = value * 10 + static_cast<std::size_t>(c - '0');
    }
    return value;
}

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
    throw ValidationError("corpus line " + std::to_string(line_no) + ": " + what);
}

Document parse_document(const std::string& line, std::size_t line_no, const Vocabulary& sv,
                        const Vocabulary& tv) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        line_error(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) line_error(line_no, "expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (key != "id" && key != "sensory" && key != "caption" && key != "category") {
            line_error(line_no, "unknown field '" + key + "'");
        }
    }
    for (const char* field : {"id", "sensory", "caption", "category"}) {
        if (!obj.contains(field)) line_error(line_no, std::string("missing field '") + field + "'");
    }

    Document doc;
    if (!obj["id"].is_string()) line_error(line_no, "'id' must be a string");
    doc.id = obj["id"].get<std::string>();
    if (doc.id.empty()) line_error(line_no, "'id' must be non-empty");

    if (!obj["sensory"].is_object()) line_error(line_no, "'sensory' must be an object");
    std::vector<BowEntry> entries;
    for (const auto& [key, value] : obj["sensory"].items()) {
        auto idx = parse_canonical_index(key);
        if (!idx) line_error(line_no, "sensory key '" + key + "' is not a canonical decimal index");
        if (*idx >= sv.size()) {
            line_error(line_no, "sensory index " + key + " out of range for vocabulary of size " +
                                    std::to_string(sv.size()));
        }
        if (!value.is_number_unsigned() || value.get<std::uint64_t>() == 0) {
            line_error(line_no, "sensory count for index " + key + " must be a positive integer");
        }
        entries.push_back({*idx, value.get<std::size_t>()});
    }
    if (entries.empty()) line_error(line_no, "'sensory' must contain at least one word");
    doc.sensory = BowVector::from_entries(std::move(entries));

    if (!obj["caption"].is_array()) line_error(line_no, "'caption' must be an array");
    for (const auto& item : obj["caption"]) {
        if (!item.is_string()) line_error(line_no, "'caption' entries must be strings");
        const auto token = item.get<std::string>();
        auto idx = tv.find(token);
        if (!idx) line_error(line_no, "caption token '" + token + "' is not in the text vocabulary");
        doc.caption.push_back(*idx);
    }

    const auto& cat = obj["category"];
    if (cat.is_string()) {
        doc.category = cat.get<std::string>();
    } else if (!cat.is_null()) {
        line_error(line_no, "'category' must be a string or null");
    }
    return doc;
}

} // namespace

BowVector BowVector::from_entries(std::vector<BowEntry> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const BowEntry& a, const BowEntry& b) { return a.word < b.word; });
    BowVector bow;
    bow.entries = std::move(entries);
    for (std::size_t i = 0; i < bow.entries.size(); ++i) {
        const BowEntry& e = bow.entries[i];
        if (e.count == 0) {
            throw ValidationError("bag-of-words count for word " + std::to_string(e.word) +
                                  " must be positive");
        }
        if (i > 0 && bow.entries[i - 1].word == e.word) {
            throw ValidationError("duplicate bag-of-words entry for word " + std::to_string(e.word));
        }
        bow.total += e.count;
    }
    return bow;
}

void BowVector::validate(std::size_t vocab_size) const {
    std::size_t sum = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const BowEntry& e = entries[i];
        if (e.word >= vocab_size) {
            throw ValidationError("bag-of-words index " + std::to_string(e.word) +
                                  " out of range for vocabulary of size " + std::to_string(vocab_size));
        }
        if (e.count == 0) {
            throw ValidationError("bag-of-words count for word " + std::to_string(e.word) +
                                  " must be positive");
        }
        if (i > 0 && entries[i - 1].word >= e.word) {
            throw ValidationError("bag-of-words entries must be sorted by strictly increasing word index");
        }
        sum += e.count;
    }
    if (sum != total) {
        throw ValidationError("bag-of-words total " + std::to_string(total) +
                              " does not match sum of counts " + std::to_string(sum));
    }
}

void Document::validate(std::size_t sensory_vocab_size, std::size_t text_vocab_size) const {
    if (id.empty()) throw ValidationError("document id must be non-empty");
    try {
        sensory.validate(sensory_vocab_size);
        if (sensory.total == 0) {
            throw ValidationError("document must contain at least one sensory word");
        }
        for (std::size_t w : caption) {
            if (w >= text_vocab_size) {
                throw ValidationError("caption index " + std::to_string(w) +
                                      " out of range for vocabulary of size " +
                                      std::to_string(text_vocab_size));
            }
        }
    } catch (const ValidationError& e) {
        throw ValidationError("document '" + id + "': " + e.what());
    }
}

Corpus::Corpus(std::vector<Document> documents, Vocabulary sensory_vocab, Vocabulary text_vocab)
    : documents_(std::move(documents)),
      sensory_vocab_(std::move(sensory_vocab)),
      text_vocab_(std::move(text_vocab)) {
    std::unordered_set<std::string> seen;
    seen.reserve(documents_.size());
    for (const Document& doc : documents_) {
        doc.validate(sensory_vocab_.size(), text_vocab_.size());
        if (!seen.insert(doc.id).second) {
            throw ValidationError("duplicate document id '" + doc.id + "'");
        }
    }
}

Corpus load_corpus(const std::filesystem::path& path, const Vocabulary& sensory_vocab,
                   const Vocabulary& text_vocab) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open corpus file: " + path.string());
    }
    std::vector<Document> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) line_error(line_no, "blank line");
        docs.push_back(parse_document(line, line_no, sensory_vocab, text_vocab));
    }
    return Corpus(std::move(docs), sensory_vocab, text_vocab);
}

std::string corpus_line(const Document& doc, const Vocabulary& text_vocab) {
    nlohmann::ordered_json obj;
    obj["id"] = doc.id;
    nlohmann::ordered_json sensory = nlohmann::ordered_json::object();
    for (const BowEntry& e : doc.sensory.entries) {
        sensory[std::to_string(e.word)] = e.count;
    }
    obj["sensory"] = std::move(sensory);
    nlohmann::ordered_json caption = nlohmann::ordered_json::array();
    for (std::size_t w : doc.caption) {
        caption.push_back(text_vocab.token(w));
    }
    obj["caption"] = std::move(caption);
    if (doc.category) {
        obj["category"] = *doc.category;
    } else {
        obj["category"] = nullptr;
    }
    return obj.dump();
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write corpus file: " + path.string());
    }
    for (const Document& doc : corpus.documents()) {
        out << corpus_line(doc, corpus.text_vocab()) << '\n';
    }
    if (!out) {
        throw ValidationError("failed writing corpus file: " + path.string());
    }
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_fraction,
                                       std::uint64_t seed) {
    const std::size_t n = corpus.size();
    if (n < 2) {
        throw ValidationError("cannot split a corpus with fewer than 2 documents");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ValidationError("test fraction must lie strictly between 0 and 1");
    }
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test >= n) {
        throw ValidationError("test fraction " + std::to_string(test_fraction) +
                              " leaves an empty partition for " + std::to_string(n) + " documents");
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[rng.next_index(i + 1)]);
    }

    std::vector<bool> is_test(n, false);
    for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;

    std::vector<Document> train_docs;
    std::vector<Document> test_docs;
    train_docs.reserve(n - n_test);
    test_docs.reserve(n_test);
    for (std::size_t i = 0; i < n; ++i) {
        (is_test[i] ? test_docs : train_docs).push_back(corpus.doc(i));
    }
    return {Corpus(std::move(train_docs), corpus.sensory_vocab(), corpus.text_vocab()),
            Corpus(std::move(test_docs), corpus.sensory_vocab(), corpus.text_vocab())};
}

} // namespace corrlda
