#include "corrlda/vocabulary.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "corrlda/errors.hpp"

namespace corrlda {

namespace {

bool has_whitespace(std::string_view token) {
    for (unsigned char c : token) {
        if (std::isspace(c)) return true;
    }
    return false;
}

} // namespace

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    if (tokens.empty()) {
        throw ValidationError("vocabulary must contain at least one token");
    }
    Vocabulary vocab;
    vocab.tokens_ = std::move(tokens);
    vocab.index_.reserve(vocab.tokens_.size());
    for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
        const std::string& tok = vocab.tokens_[i];
        if (tok.empty()) {
            throw ValidationError("vocabulary token at index " + std::to_string(i) + " is empty");
        }
        if (has_whitespace(tok)) {
            throw ValidationError("vocabulary token '" + tok + "' contains whitespace");
        }
        auto [it, inserted] = vocab.index_.emplace(tok, i);
        if (!inserted) {
            throw ValidationError("duplicate vocabulary token '" + tok + "' at lines " +
                                  std::to_string(it->second + 1) + " and " + std::to_string(i + 1));
        }
    }
    return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open vocabulary file: " + path.string());
    }
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(line);
    }
    // A trailing newline produces no extra entry with getline, but guard the
    // common mistake of a blank final line explicitly for a clearer message.
    if (!tokens.empty() && tokens.back().empty()) {
        throw ValidationError("vocabulary file has a blank line: " + path.string());
    }
    return from_tokens(std::move(tokens));
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write vocabulary file: " + path.string());
    }
    for (const std::string& tok : tokens_) {
        out << tok << '\n';
    }
    if (!out) {
        throw ValidationError("failed writing vocabulary file: " + path.string());
    }
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

} // namespace corrlda
