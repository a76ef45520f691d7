#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "corrlda/stopwords.hpp"
#include "corrlda/vocabulary.hpp"

namespace corrlda {

struct TokenizeResult {
    std::vector<std::size_t> indices; // in-vocabulary word ids, in text order
    std::vector<std::string> oov_tokens; // surviving tokens missing from the vocabulary
    std::size_t stopword_count = 0; // tokens dropped by the stop list
};

// Lowercases ASCII letters, keeps letters and digits, and treats every other
// byte as a separator. Stop words are removed before vocabulary lookup.
std::vector<std::string> split_tokens(std::string_view text);

TokenizeResult tokenize_caption(std::string_view text, const Vocabulary& vocab,
                                const StopwordSet& stopwords);

} // namespace corrlda
