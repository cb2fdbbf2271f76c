#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "semshift/detector.hpp"

namespace semshift {

/// Gold binary labels: 0 stable, 1 shifted.
struct GoldLabels {
    std::map<std::string, int> labels;

    std::size_t size() const { return labels.size(); }
    std::set<std::string> shifted() const;
    std::vector<std::string> words() const;
};

GoldLabels read_gold(const std::filesystem::path& path);
void write_gold(const std::filesystem::path& path, const GoldLabels& gold);

/// One row of the metric panel.
struct EvalReport {
    std::string method_id;
    double cs_avg_sw = 0.0;
    double acc_mean = 0.0;
    double acc_2sigma = 0.0;
    double mu_rank = 0.0;
    double r_p50 = 0.0;
    double r_down_k = 0.0;
};

/// Fraction of gold words whose predicted label matches. Throws if a gold word has no prediction.
double accuracy(const std::map<std::string, int>& predicted, const GoldLabels& gold);
double accuracy(const LabelTable& predicted, const GoldLabels& gold);

/// Mean score over the scorable members of `anchor`.
double avg_anchor_cosine(const ChangeScoreTable& table, const std::set<std::string>& anchor);

/// Mean of rank(w)/N over gold-shifted words, N = |gold|.
double mu_rank(const std::vector<RankedWord>& ranked, const GoldLabels& gold);

/// Share of gold-shifted words within the first ⌈p·N⌉ ranks.
double recall_at_fraction(const std::vector<RankedWord>& ranked, const GoldLabels& gold, double p);

/// Share of gold-shifted words within the first k ranks. Throws if k > N.
double recall_at_k(const std::vector<RankedWord>& ranked, const GoldLabels& gold, std::size_t k);

/// ⌈0.3·N⌉, the bottom-30% window.
std::size_t default_recall_k(std::size_t n);

/// Top `top_n` method ids by descending cs_avg_sw, ties by id.
std::vector<std::string> select_models(const std::vector<EvalReport>& reports, std::size_t top_n = 4);

void write_report(const std::filesystem::path& path, const std::vector<EvalReport>& reports);

}  // namespace semshift
