#include "kbc/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "kbc/error.hpp"
#include "kbc/parallel.hpp"

namespace kbc {

namespace fs = std::filesystem;

bool is_token_code_point(char32_t c) {
    return u_isalnum(static_cast<UChar32>(c)) != 0;
}

char32_t normalize_code_point(char32_t c) {
    UChar32 folded = u_foldCase(static_cast<UChar32>(c), U_FOLD_CASE_DEFAULT);
    if (u_isUUppercase(folded)) folded = u_tolower(folded);
    return static_cast<char32_t>(folded);
}

Tokens tokenize(std::string_view text) {
    Tokens tokens;
    std::string current;
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
    const std::int64_t length = static_cast<std::int64_t>(text.size());
    std::int64_t i = 0;
    while (i < length) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        if (c >= 0 && is_token_code_point(static_cast<char32_t>(c))) {
            const UChar32 folded = static_cast<UChar32>(normalize_code_point(static_cast<char32_t>(c)));
            std::uint8_t buf[U8_MAX_LENGTH];
            std::int32_t n = 0;
            U8_APPEND_UNSAFE(buf, n, folded);
            current.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

bool is_valid_utf8(std::string_view text) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
    const std::int64_t length = static_cast<std::int64_t>(text.size());
    std::int64_t i = 0;
    while (i < length) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        if (c < 0) return false;
    }
    return true;
}

Document Document::from_text(std::string id, std::string raw_text) {
    Document doc{std::move(id), std::move(raw_text), {}};
    doc.tokens = tokenize(doc.raw_text);
    return doc;
}

Corpus make_corpus(std::vector<Document> documents, std::string source) {
    std::sort(documents.begin(), documents.end(),
              [](const Document& a, const Document& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < documents.size(); ++i) {
        if (documents[i].id.empty())
            throw ValidationError("corpus " + source + ": document with empty id");
        if (i > 0 && documents[i].id == documents[i - 1].id)
            throw ValidationError("corpus " + source + ": duplicate document id '" +
                                  documents[i].id + "'");
    }
    return Corpus{std::move(documents), std::move(source)};
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("error while reading " + path.string());
    return std::move(buffer).str();
}

namespace {

Document checked_document(std::string id, std::string text) {
    if (!is_valid_utf8(text))
        throw ValidationError("document '" + id + "' is not valid UTF-8");
    return Document::from_text(std::move(id), std::move(text));
}

Corpus load_directory(const fs::path& root, unsigned threads) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw IoError("not a readable directory: " + root.string());

    std::vector<fs::path> files;
    auto it = fs::recursive_directory_iterator(root, ec);
    if (ec) throw IoError("cannot read directory " + root.string() + ": " + ec.message());
    for (const auto end = fs::recursive_directory_iterator(); it != end; it.increment(ec)) {
        if (ec) throw IoError("cannot read directory " + root.string() + ": " + ec.message());
        if (it->is_regular_file()) files.push_back(it->path());
    }

    auto documents = parallel_map<Document>(
        files.size(),
        [&](std::size_t i) {
            return checked_document(fs::relative(files[i], root).generic_string(),
                                    read_file(files[i]));
        },
        threads);
    return make_corpus(std::move(documents), root.string());
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](char ch) {
        return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\v' || ch == '\f';
    });
}

Corpus load_lines(const fs::path& file) {
    const std::string content = read_file(file);
    std::vector<std::string> lines;
    std::istringstream in(content);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }

    const std::size_t width = std::max<std::size_t>(6, std::to_string(lines.size()).size());
    std::vector<Document> documents;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (is_blank(lines[i])) continue;
        std::string id = std::to_string(i + 1);
        id.insert(0, width - id.size(), '0');
        documents.push_back(checked_document(std::move(id), std::move(lines[i])));
    }
    return make_corpus(std::move(documents), file.string());
}

}  // namespace

Corpus load_corpus(const fs::path& source, CorpusFormat format, unsigned threads) {
    if (!fs::exists(source)) throw IoError("no such corpus: " + source.string());
    return format == CorpusFormat::Directory ? load_directory(source, threads)
                                             : load_lines(source);
}

Corpus load_corpus(const fs::path& source, unsigned threads) {
    return load_corpus(source,
                       fs::is_directory(source) ? CorpusFormat::Directory
                                                : CorpusFormat::LineDelimited,
                       threads);
}

}  // namespace kbc
