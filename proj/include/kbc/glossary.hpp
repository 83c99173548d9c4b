#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kbc/text.hpp"

namespace kbc {

using KeywordId = std::uint32_t;

// Per-document keyword counts. Only keywords with a non-zero count are stored;
// iteration is in ascending keyword id.
struct MatchProfile {
    std::map<KeywordId, std::uint64_t> tf;
    std::uint64_t total_matches = 0;

    void add(KeywordId id, std::uint64_t count = 1) {
        tf[id] += count;
        total_matches += count;
    }
    std::size_t species() const { return tf.size(); }

    friend bool operator==(const MatchProfile&, const MatchProfile&) = default;
};

// A category's keyword phrases compiled into a token trie.
//
// Keyword ids are dense and follow ascending lexicographic order of the
// phrases (token-wise comparison). The trie is immutable after construction,
// so one Glossary can be matched against many documents concurrently.
class Glossary {
public:
    // Phrases must already be normalized; duplicates are merged.
    Glossary(std::string category, std::vector<Tokens> phrases);

    const std::string& category() const { return category_; }
    std::size_t size() const { return phrases_.size(); }
    const Tokens& phrase(KeywordId id) const { return phrases_.at(id); }
    const std::vector<Tokens>& phrases() const { return phrases_; }
    std::string phrase_text(KeywordId id) const;

    // Hex SHA-256 over the phrases in id order, one space-joined phrase per line.
    const std::string& digest() const { return digest_; }

    // Leftmost-longest, non-overlapping: at each position the longest phrase
    // starting there is counted and the scan resumes after it.
    MatchProfile match(std::span<const std::string> tokens) const;

private:
    struct Node {
        std::unordered_map<std::uint32_t, std::uint32_t> next;
        std::int64_t keyword = -1;
    };

    std::string category_;
    std::vector<Tokens> phrases_;
    std::string digest_;
    std::unordered_map<std::string, std::uint32_t> vocabulary_;
    std::vector<Node> trie_;
};

// One phrase per line, '#' comments and blank lines skipped. The category is
// the file stem unless given explicitly.
Glossary load_glossary(const std::filesystem::path& source, std::string category = {});
Glossary parse_glossary(std::string_view content, std::string category);

std::string sha256_hex(std::string_view data);

}  // namespace kbc
