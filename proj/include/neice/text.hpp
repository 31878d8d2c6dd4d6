#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

namespace neice {

using WordSet = std::unordered_set<std::string>;

// Lowercase alphabetic tokens. Runs of ASCII letters are kept, everything
// else separates; single-letter tokens and stopwords are dropped.
std::vector<std::string> tokenize(const std::string& text, const WordSet& stopwords);

// One token per line, UTF-8, '#' comments and blank lines ignored.
WordSet load_word_list(const std::string& path);

// Whitespace-separated token count of a raw field (dataset statistics).
std::size_t raw_word_count(const std::string& text);

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64(const std::string& s);
std::uint64_t hash_file(const std::string& path);

}  // namespace neice
