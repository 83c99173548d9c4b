#include "kbc/glossary.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <memory>
#include <sstream>

#include "kbc/error.hpp"

namespace kbc {

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                               &EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
        throw std::runtime_error("SHA-256 computation failed");

    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

namespace {
std::string join(const Tokens& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}
}  // namespace

Glossary::Glossary(std::string category, std::vector<Tokens> phrases)
    : category_(std::move(category)), phrases_(std::move(phrases)) {
    for (const auto& p : phrases_) require(!p.empty(), "glossary phrase must be non-empty");
    std::sort(phrases_.begin(), phrases_.end());
    phrases_.erase(std::unique(phrases_.begin(), phrases_.end()), phrases_.end());
    if (phrases_.empty()) throw ValidationError("glossary '" + category_ + "' has no keywords");

    std::string canonical;
    trie_.emplace_back();
    for (KeywordId id = 0; id < phrases_.size(); ++id) {
        canonical += join(phrases_[id]);
        canonical.push_back('\n');

        std::uint32_t node = 0;
        for (const auto& token : phrases_[id]) {
            const auto [vit, _] = vocabulary_.try_emplace(
                token, static_cast<std::uint32_t>(vocabulary_.size()));
            auto& next = trie_[node].next;
            auto child = next.find(vit->second);
            if (child == next.end()) {
                const auto fresh = static_cast<std::uint32_t>(trie_.size());
                trie_[node].next.emplace(vit->second, fresh);
                trie_.emplace_back();
                node = fresh;
            } else {
                node = child->second;
            }
        }
        trie_[node].keyword = id;
    }
    digest_ = sha256_hex(canonical);
}

std::string Glossary::phrase_text(KeywordId id) const { return join(phrase(id)); }

MatchProfile Glossary::match(std::span<const std::string> tokens) const {
    MatchProfile profile;
    std::size_t pos = 0;
    while (pos < tokens.size()) {
        std::uint32_t node = 0;
        std::int64_t best_keyword = -1;
        std::size_t best_end = pos;
        for (std::size_t i = pos; i < tokens.size(); ++i) {
            const auto vid = vocabulary_.find(tokens[i]);
            if (vid == vocabulary_.end()) break;
            const auto child = trie_[node].next.find(vid->second);
            if (child == trie_[node].next.end()) break;
            node = child->second;
            if (trie_[node].keyword >= 0) {
                best_keyword = trie_[node].keyword;
                best_end = i + 1;
            }
        }
        if (best_keyword >= 0) {
            profile.add(static_cast<KeywordId>(best_keyword));
            pos = best_end;
        } else {
            ++pos;
        }
    }
    return profile;
}

Glossary parse_glossary(std::string_view content, std::string category) {
    std::vector<Tokens> phrases;
    std::istringstream in{std::string(content)};
    std::size_t line_number = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        if (!is_valid_utf8(line))
            throw ValidationError("glossary line " + std::to_string(line_number) +
                                  " is not valid UTF-8");
        Tokens tokens = tokenize(line);
        if (tokens.empty())
            throw ValidationError("glossary line " + std::to_string(line_number) +
                                  " contains no keyword tokens");
        phrases.push_back(std::move(tokens));
    }
    if (phrases.empty()) throw ValidationError("glossary '" + category + "' has no keywords");
    return Glossary(std::move(category), std::move(phrases));
}

Glossary load_glossary(const std::filesystem::path& source, std::string category) {
    if (category.empty()) category = source.stem().string();
    return parse_glossary(read_file(source), std::move(category));
}

}  // namespace kbc
