#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "semshift/corpus.hpp"
#include "semshift/evaluator.hpp"

namespace semshift {

/// Parameters of a synthetic two-slice corpus with injected meaning shifts.
///
/// Each sentence draws one topic; every token is a filler (stop) word with
/// probability `filler_prob`, else a Zipf-distributed word of that topic.
/// In T1 each (recipient, donor) pair swaps occurrences with probability
/// `replace_prob`, so the recipient inherits the donor's contexts while both
/// keep their frequencies.
struct DriftSpec {
    std::size_t vocab_size = 2000;
    std::size_t topics = 10;
    std::size_t sentences_per_slice = 60000;
    std::size_t sentence_length = 12;
    std::vector<std::pair<std::string, std::string>> shift_pairs;  // (recipient, donor)
    double replace_prob = 1.0;
    std::uint64_t seed = 1;

    std::size_t filler_words = 50;
    double filler_prob = 0.3;
    double zipf_exponent = 1.0;
    /// Stable test candidates are drawn from this least-frequent share of each topic.
    double stable_tail_fraction = 0.5;
    std::uint64_t min_count = 5;

    void validate() const;
};

/// Name of the word with frequency rank `rank` (0-based) inside `topic`.
std::string topic_word(std::size_t topic, std::size_t rank);
std::string filler_word(std::size_t i);

/// `n` recipient/donor pairs taken from different topics at matching frequency ranks.
std::vector<std::pair<std::string, std::string>> default_shift_pairs(const DriftSpec& spec, std::size_t n = 6);

struct SynthBundle {
    std::vector<std::string> t0_lines;
    std::vector<std::string> t1_lines;
    /// Candidate pool: recipients labelled 1, eligible stable words labelled 0.
    GoldLabels gold;
    std::vector<std::string> stopwords;
    /// Topic index of every topic word; fillers map to -1.
    std::map<std::string, int> topic_of;

    SentenceCorpus corpus_t0() const { return SentenceCorpus::from_lines(Slice::T0, t0_lines); }
    SentenceCorpus corpus_t1() const { return SentenceCorpus::from_lines(Slice::T1, t1_lines); }
};

/// Deterministic in `spec`. Throws InvalidArgument if a gold word falls below
/// `min_count` occurrences in either slice.
SynthBundle generate(const DriftSpec& spec);

struct TestSet {
    std::vector<std::string> words;
    GoldLabels gold;
};

/// Samples `stable_n` stable and `shifted_n` shifted words from the bundle's pool.
TestSet emit_testset(const SynthBundle& bundle, std::size_t stable_n = 12, std::size_t shifted_n = 6,
                     std::uint64_t seed = 1);

/// Paths written by write_bundle.
struct BundleFiles {
    std::filesystem::path corpus_t0;
    std::filesystem::path corpus_t1;
    std::filesystem::path stopwords;
    std::filesystem::path gold;
    std::filesystem::path testset;
};

/// Writes t0.txt, t1.txt, stopwords.txt, gold.tsv and testset.txt into `dir`.
BundleFiles write_bundle(const std::filesystem::path& dir, const SynthBundle& bundle, const TestSet& test);

}  // namespace semshift
