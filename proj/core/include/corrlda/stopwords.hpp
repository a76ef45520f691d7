#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>

#include "corrlda/vocabulary.hpp"

namespace corrlda {

// Case-sensitive membership set for caption filtering. Tokens are expected
// to already be lowercased by the tokenizer.
class StopwordSet {
public:
    StopwordSet() = default;

    // Built-in English list compiled into the library.
    static const StopwordSet& builtin();

    // One token per line; blank lines ignored.
    static StopwordSet load(const std::filesystem::path& path);

    void insert(std::string token) { words_.insert(std::move(token)); }
    bool contains(std::string_view token) const {
        return words_.find(token) != words_.end();
    }
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string, detail::StringHash, detail::StringEq> words_;
};

} // namespace corrlda
