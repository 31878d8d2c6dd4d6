#include "neice/text.hpp"

#include <cctype>
#include <fstream>

#include "neice/common.hpp"

namespace neice {

std::vector<std::string> tokenize(const std::string& text, const WordSet& stopwords) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2 && !stopwords.count(cur)) tokens.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        if (c < 128 && std::isalpha(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

WordSet load_word_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open word list: " + path);
    WordSet words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        words.insert(line);
    }
    return words;
}

std::size_t raw_word_count(const std::string& text) {
    std::size_t n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        bool ws = (c == ' ' || c == '\t' || c == '\n' || c == '\r');
        if (!ws && !in_word) ++n;
        in_word = !ws;
    }
    return n;
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const auto n = static_cast<std::size_t>(in.gcount());
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

}  // namespace neice
