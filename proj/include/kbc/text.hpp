#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kbc {

using Tokens = std::vector<std::string>;

// Splits text into maximal runs of Unicode letters and decimal digits.
// Every code point of a token is case folded; the few letters whose simple
// fold is still uppercase (U+0130, Cherokee) are additionally lowercased, so
// tokens never contain a code point with a pending lowercase mapping.
// Bytes that are not valid UTF-8 act as separators.
Tokens tokenize(std::string_view text);

// Normalization applied to a single letter or digit inside tokenize().
char32_t normalize_code_point(char32_t c);
bool is_token_code_point(char32_t c);

bool is_valid_utf8(std::string_view text);

struct Document {
    std::string id;
    std::string raw_text;
    Tokens tokens;

    static Document from_text(std::string id, std::string raw_text);
    std::size_t word_count() const { return tokens.size(); }

    friend bool operator==(const Document&, const Document&) = default;
};

enum class CorpusFormat { Directory, LineDelimited };

struct Corpus {
    std::vector<Document> documents;
    std::string source;

    std::size_t size() const { return documents.size(); }
    bool empty() const { return documents.empty(); }

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Sorts documents by id and rejects duplicate or empty ids.
Corpus make_corpus(std::vector<Document> documents, std::string source);

// Directory: one document per regular file (recursive), id = path relative to
// the directory. Line-delimited: one document per non-blank line, id = the
// physical line number zero-padded to at least six digits.
Corpus load_corpus(const std::filesystem::path& source, CorpusFormat format,
                   unsigned threads = 0);

// Picks Directory for directories and LineDelimited for regular files.
Corpus load_corpus(const std::filesystem::path& source, unsigned threads = 0);

std::string read_file(const std::filesystem::path& path);

}  // namespace kbc
