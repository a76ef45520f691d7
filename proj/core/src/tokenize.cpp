#include "corrlda/tokenize.hpp"

namespace corrlda {

namespace {

bool keep_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char lower_char(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

} // namespace

std::vector<std::string> split_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (keep_char(c)) {
            current.push_back(lower_char(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

TokenizeResult tokenize_caption(std::string_view text, const Vocabulary& vocab,
                                const StopwordSet& stopwords) {
    TokenizeResult result;
    for (std::string& tok : split_tokens(text)) {
        if (stopwords.contains(tok)) {
            ++result.stopword_count;
            continue;
        }
        if (auto idx = vocab.find(tok)) {
            result.indices.push_back(*idx);
        } else {
            result.oov_tokens.push_back(std::move(tok));
        }
    }
    return result;
}

} // namespace corrlda
