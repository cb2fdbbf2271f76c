#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace semshift {

/// Time slice a corpus or embedding space belongs to. `Merged` labels the
/// concatenation of both slices used to train the compass base model.
enum class Slice { T0, T1, Merged };

std::string_view slice_name(Slice s);

/// Splits a line into maximal runs of non-whitespace bytes. No normalization.
std::vector<std::string> tokenize_line(std::string_view line);

/// Sentences of one time slice, streamed from files or held in memory.
///
/// Iteration re-reads the sources every time and yields identical sequences.
class SentenceCorpus {
public:
    static SentenceCorpus from_file(Slice slice, std::filesystem::path path);
    static SentenceCorpus from_lines(Slice slice, std::vector<std::string> lines);
    /// Concatenation of `a` then `b`, labelled `Merged`.
    static SentenceCorpus concat(const SentenceCorpus& a, const SentenceCorpus& b);

    Slice slice() const { return slice_; }

    /// Calls `fn` once per line, in order. Throws IoError if a source is unreadable.
    void for_each_line(const std::function<void(std::string_view)>& fn) const;
    void for_each_sentence(const std::function<void(const std::vector<std::string>&)>& fn) const;

    std::size_t sentence_count() const;
    std::string describe() const;

private:
    struct Source {
        std::filesystem::path path;
        std::shared_ptr<const std::vector<std::string>> lines;
    };

    Slice slice_ = Slice::T0;
    std::vector<Source> sources_;
};

/// Word ↔ index map with raw frequency counts.
///
/// Entries are ordered by descending count, ties by byte-wise word order.
class Vocabulary {
public:
    struct Entry {
        std::string word;
        std::uint64_t count = 0;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    Vocabulary() = default;
    /// Validates uniqueness and positivity; sorts into canonical order.
    explicit Vocabulary(std::vector<Entry> entries, std::uint64_t min_count = 1);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }
    const std::string& word(std::size_t i) const { return entries_[i].word; }
    std::uint64_t count(std::size_t i) const { return entries_[i].count; }
    std::uint64_t total_tokens() const { return total_tokens_; }
    std::uint64_t min_count() const { return min_count_; }

    std::optional<std::size_t> find(std::string_view word) const;
    bool contains(std::string_view word) const { return find(word).has_value(); }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.entries_ == b.entries_;
    }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
    };

    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
    std::uint64_t total_tokens_ = 0;
    std::uint64_t min_count_ = 1;
};

/// Throws IoError on unreadable sources and InvalidArgument("empty vocabulary")
/// when no word reaches `min_count`.
Vocabulary build_vocabulary(const SentenceCorpus& corpus, std::uint64_t min_count);

enum class WordSetKind { SW, CW, TEST };
std::string_view word_set_name(WordSetKind k);

/// Named anchor or evaluation set resolved against both slice vocabularies.
struct WordSet {
    enum class Status { Kept, DroppedT0, DroppedT1 };

    WordSetKind kind = WordSetKind::SW;
    std::set<std::string> words;
    std::string provenance;
    /// One line per candidate word, in input order, for the word-set report.
    std::vector<std::pair<std::string, Status>> report;

    std::size_t dropped() const;
    bool contains(const std::string& w) const { return words.count(w) != 0; }
};

/// Shared words of both vocabularies minus `exclude`. Throws if the result is empty.
WordSet common_words(const Vocabulary& v0, const Vocabulary& v1, const WordSet* exclude = nullptr);

/// Stop words from a one-word-per-line file, restricted to words present in both
/// vocabularies. Throws IoError if unreadable and InvalidArgument if nothing survives.
WordSet load_stopwords(const std::filesystem::path& path, const Vocabulary& v0, const Vocabulary& v1);

/// One word per line; blank lines skipped; duplicates removed keeping first occurrence.
std::vector<std::string> read_word_list(const std::filesystem::path& path);

/// TSV `word<TAB>kept|dropped_T0|dropped_T1`.
void write_word_set_report(const std::filesystem::path& path, const WordSet& set);

}  // namespace semshift
