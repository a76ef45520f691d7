#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace corrlda {

namespace detail {
struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
        return std::hash<std::string_view>{}(s);
    }
};
struct StringEq {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const noexcept { return a == b; }
};
} // namespace detail

// Bidirectional token <-> index table. Tokens are unique, non-empty,
// whitespace-free; index i holds the token from line i of the source file.
class Vocabulary {
public:
    // Validates and builds the index. Throws ValidationError on duplicate,
    // empty, or whitespace-bearing tokens, and on an empty token list.
    static Vocabulary from_tokens(std::vector<std::string> tokens);

    // One token per line, UTF-8, LF endings; line number = index.
    static Vocabulary load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    std::size_t size() const { return tokens_.size(); }
    const std::string& token(std::size_t index) const { return tokens_.at(index); }
    std::optional<std::size_t> find(std::string_view token) const;
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    Vocabulary() = default;

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t, detail::StringHash, detail::StringEq> index_;
};

} // namespace corrlda
