#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "semshift/corpus.hpp"
#include "semshift/embedder.hpp"
#include "semshift/matrix.hpp"

namespace semshift {

enum class Method { OP, LR, FFNN, TWEC };

/// Parsed `METHOD[_TRAINSET]_ALGO` identifier, e.g. OP_SW_CBOW or TWEC_SG.
struct MethodId {
    Method method = Method::TWEC;
    std::optional<WordSetKind> trainset;  // absent exactly for TWEC
    Algorithm algorithm = Algorithm::CBOW;

    std::string str() const;
    friend auto operator<=>(const MethodId&, const MethodId&) = default;
};

/// Throws InvalidArgument naming the offending string when it does not fit the grammar.
MethodId parse_method_id(std::string_view s);

/// Cosine similarity, clamped to [-1, 1]. Throws on a zero vector or length mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

/// Per-word cross-slice cosine for one method.
struct ChangeScoreTable {
    std::string method_id;
    std::map<std::string, double> scores;
    std::set<std::string> unscorable;

    std::optional<double> score(const std::string& w) const;
};

/// cos(w⁰, w¹) for each word; words missing from either space (or with a zero vector)
/// become unscorable. Throws ContractViolation if a compass slice carries an alignment.
ChangeScoreTable score_direct(const EmbeddingSpace& s0, const EmbeddingSpace& s1_aligned,
                              std::span<const std::string> words, std::string method_id = {});

/// cos(predicted row i, actual w¹) for words[i]. Rows must line up with `words`.
ChangeScoreTable score_predictive(const Matrix& predicted, const EmbeddingSpace& s1,
                                  std::span<const std::string> words, std::string method_id = {});

enum class Rule { Mean, MeanMinus2Sigma };
std::string_view rule_name(Rule r);
Rule parse_rule(std::string_view s);

struct ThresholdStats {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    Rule rule = Rule::Mean;
    double cutoff = 0.0;
};

/// Mean and population std over every scored word of `table`, or over the scored
/// members of `population` when given. Throws if that population is empty.
ThresholdStats threshold_stats(const ChangeScoreTable& table, Rule rule,
                               const std::vector<std::string>* population = nullptr);

struct LabelTable {
    std::map<std::string, int> labels;   // scorable test words only
    std::vector<std::string> defaulted;  // unscorable test words, label 0
    Rule rule = Rule::Mean;
    std::string method_id;

    int label_of(const std::string& w) const;
    std::set<std::string> shifted() const;
};

/// label = 1 iff score < cutoff, strictly.
LabelTable classify(const ChangeScoreTable& table, const ThresholdStats& stats,
                    std::span<const std::string> test_words);

struct RankedWord {
    std::string word;
    double score = 0.0;
    std::size_t rank = 0;  // 1 = lowest cosine
};

/// Scorable test words by ascending score, ties by word.
std::vector<RankedWord> rank_ascending(const ChangeScoreTable& table, std::span<const std::string> test_words);

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
};

/// Equal-width bins over [-1, 1]; right-exclusive except the last bin.
std::vector<HistogramBin> histogram(const ChangeScoreTable& table, const std::set<std::string>& word_set,
                                    std::size_t bins);

// TSV formats: `word<TAB>score` (NA when unscorable), `word<TAB>label`,
// `bin_low<TAB>bin_high<TAB>count`.

void write_scores(const std::filesystem::path& path, const ChangeScoreTable& table);
ChangeScoreTable read_scores(const std::filesystem::path& path, std::string method_id = {});
void write_labels(const std::filesystem::path& path, const LabelTable& labels);
std::map<std::string, int> read_labels(const std::filesystem::path& path);
void write_histogram(const std::filesystem::path& path, const std::vector<HistogramBin>& bins);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

}  // namespace semshift
