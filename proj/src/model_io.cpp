#include "kbc/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "kbc/error.hpp"
#include "kbc/glossary.hpp"
#include "kbc/text.hpp"

namespace kbc {

namespace fs = std::filesystem;

std::string format_real(double value) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", value);
    return std::string(buf, static_cast<std::size_t>(n));
}

double parse_real(std::string_view text, std::string_view what) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
        throw ValidationError("invalid number for " + std::string(what) + ": '" +
                              std::string(text) + "'");
    return value;
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw ValidationError("invalid non-negative integer for " + std::string(what) + ": '" +
                              std::string(text) + "'");
    return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
        throw ValidationError("invalid integer for " + std::string(what) + ": '" +
                              std::string(text) + "'");
    return value;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
        if (i > start) words.emplace_back(text.substr(start, i - start));
    }
    return words;
}

std::vector<Record> parse_records(std::string_view content) {
    std::vector<Record> records;
    std::istringstream in{std::string(content)};
    std::size_t line_number = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto key_end = line.find_first_of(" \t", first);
        Record r;
        r.line_number = line_number;
        r.key = line.substr(first, key_end == std::string::npos ? std::string::npos
                                                                : key_end - first);
        if (key_end != std::string::npos) {
            const auto value_start = line.find_first_not_of(" \t", key_end);
            if (value_start != std::string::npos) {
                auto value_end = line.find_last_not_of(" \t");
                r.value = line.substr(value_start, value_end + 1 - value_start);
            }
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::string serialize_model(const BackgroundModel& model) {
    require(model.category.find('\n') == std::string::npos, "category may not contain newlines");
    require(model.df.size() == model.phrases.size(), "df and phrase tables differ in size");
    std::ostringstream out;
    out << "format_version " << kModelFormatVersion << '\n'
        << "category " << model.category << '\n'
        << "glossary_digest " << model.glossary_digest << '\n'
        << "n_docs " << model.n_docs << '\n'
        << "k " << model.k << '\n'
        << "mu " << format_real(model.mu) << '\n'
        << "sigma " << format_real(model.sigma) << '\n'
        << "bias " << format_real(model.bias) << '\n';
    if (model.mode == ScoreMode::AbundanceOnly) out << "score_mode abundance\n";
    for (std::size_t id = 0; id < model.df.size(); ++id)
        out << "kw " << id << ' ' << model.df[id] << ' ' << model.phrases[id] << '\n';
    return std::move(out).str();
}

BackgroundModel parse_model(std::string_view content) {
    BackgroundModel model;
    std::map<std::string, std::string> scalars;
    for (const auto& r : parse_records(content)) {
        const auto where = "model line " + std::to_string(r.line_number);
        if (r.key == "kw") {
            const auto words = split_words(r.value);
            if (words.size() < 3) throw ValidationError(where + ": malformed kw record");
            const auto id = parse_uint(words[0], where + " keyword id");
            if (id != model.df.size())
                throw ValidationError(where + ": keyword ids must be dense and ascending");
            model.df.push_back(parse_uint(words[1], where + " df"));
            std::string phrase;
            for (std::size_t i = 2; i < words.size(); ++i) {
                if (i > 2) phrase.push_back(' ');
                phrase += words[i];
            }
            model.phrases.push_back(std::move(phrase));
        } else if (!scalars.emplace(r.key, r.value).second) {
            throw ValidationError(where + ": duplicate record '" + r.key + "'");
        }
    }

    auto take = [&](const std::string& key) -> std::string {
        const auto it = scalars.find(key);
        if (it == scalars.end()) throw ValidationError("model is missing the '" + key + "' record");
        return it->second;
    };
    if (parse_int(take("format_version"), "format_version") != kModelFormatVersion)
        throw ValidationError("unsupported model format_version");
    model.category = take("category");
    model.glossary_digest = take("glossary_digest");
    model.n_docs = parse_uint(take("n_docs"), "n_docs");
    const auto k = parse_int(take("k"), "k");
    if (k < 1 || k > std::numeric_limits<int>::max())
        throw ValidationError("model k must be a positive integer");
    model.k = static_cast<int>(k);
    model.mu = parse_real(take("mu"), "mu");
    model.sigma = parse_real(take("sigma"), "sigma");
    model.bias = parse_real(take("bias"), "bias");
    if (auto it = scalars.find("score_mode"); it != scalars.end()) {
        if (it->second == "abundance")
            model.mode = ScoreMode::AbundanceOnly;
        else if (it->second != "entropy")
            throw ValidationError("unknown score_mode '" + it->second + "'");
    }
    for (const auto& [key, _] : scalars) {
        static const char* known[] = {"format_version", "category", "glossary_digest", "n_docs",
                                      "k", "mu", "sigma", "bias", "score_mode"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ValidationError("unknown model record '" + key + "'");
    }

    if (model.n_docs == 0) throw ValidationError("model n_docs must be positive");
    if (model.sigma < 0.0) throw ValidationError("model sigma must be non-negative");
    if (model.df.empty()) throw ValidationError("model has no keywords");
    std::string canonical;
    for (std::size_t id = 0; id < model.df.size(); ++id) {
        if (model.df[id] > model.n_docs)
            throw ValidationError("model df exceeds n_docs for keyword " + std::to_string(id));
        canonical += model.phrases[id];
        canonical.push_back('\n');
    }
    if (sha256_hex(canonical) != model.glossary_digest)
        throw ValidationError("model keyword table does not match its glossary_digest");
    model.idf = idf_table(model.df, model.n_docs);
    return model;
}

void write_file_atomically(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("error while writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

void write_model(const BackgroundModel& model, const fs::path& path) {
    write_file_atomically(path, serialize_model(model));
}

BackgroundModel read_model(const fs::path& path) { return parse_model(read_file(path)); }

std::string replace_bias_record(std::string_view content, double bias) {
    std::string out;
    out.reserve(content.size() + 32);
    bool replaced = false;
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto end = content.find('\n', pos);
        const bool has_newline = end != std::string_view::npos;
        if (!has_newline) end = content.size();
        std::string_view line = content.substr(pos, end - pos);
        if (!replaced && (line.starts_with("bias ") || line.starts_with("bias\t"))) {
            out += "bias " + format_real(bias);
            if (line.ends_with('\r')) out.push_back('\r');
            replaced = true;
        } else {
            out.append(line);
        }
        if (has_newline) out.push_back('\n');
        pos = end + 1;
    }
    if (!replaced) throw ValidationError("model has no bias record to rewrite");
    return out;
}

}  // namespace kbc
