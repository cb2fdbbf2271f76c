#include "semshift/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "semshift/error.hpp"

namespace semshift {

std::set<std::string> GoldLabels::shifted() const {
    std::set<std::string> out;
    for (const auto& [w, l] : labels)
        if (l == 1) out.insert(w);
    return out;
}

std::vector<std::string> GoldLabels::words() const {
    std::vector<std::string> out;
    for (const auto& [w, l] : labels) out.push_back(w);
    return out;
}

GoldLabels read_gold(const std::filesystem::path& path) {
    GoldLabels gold;
    gold.labels = read_labels(path);
    if (gold.labels.empty()) throw InvalidArgument("gold file has no labels: " + path.string());
    return gold;
}

void write_gold(const std::filesystem::path& path, const GoldLabels& gold) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& [w, l] : gold.labels) out << w << '\t' << l << '\n';
    if (!out) throw IoError("write error on " + path.string());
}

double accuracy(const std::map<std::string, int>& predicted, const GoldLabels& gold) {
    if (gold.labels.empty()) throw InvalidArgument("accuracy: empty gold set");
    std::size_t correct = 0;
    for (const auto& [w, l] : gold.labels) {
        auto it = predicted.find(w);
        if (it == predicted.end()) throw InvalidArgument("accuracy: no prediction for gold word '" + w + "'");
        if (it->second == l) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double accuracy(const LabelTable& predicted, const GoldLabels& gold) {
    auto all = predicted.labels;
    for (const auto& w : predicted.defaulted) all.emplace(w, 0);
    return accuracy(all, gold);
}

double avg_anchor_cosine(const ChangeScoreTable& table, const std::set<std::string>& anchor) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& w : anchor)
        if (auto s = table.score(w)) {
            sum += *s;
            ++n;
        }
    if (n == 0) throw InvalidArgument("avg_anchor_cosine: no anchor word is scorable");
    return sum / static_cast<double>(n);
}

namespace {

// Ranks of the gold-shifted words; validates coverage.
std::vector<std::size_t> shifted_ranks(const std::vector<RankedWord>& ranked, const GoldLabels& gold) {
    const auto shifted = gold.shifted();
    if (shifted.empty()) throw InvalidArgument("rank metrics need at least one shifted gold word");
    std::map<std::string, std::size_t> rank_of;
    for (const auto& r : ranked) rank_of[r.word] = r.rank;
    std::vector<std::size_t> ranks;
    for (const auto& [w, l] : gold.labels) {
        auto it = rank_of.find(w);
        if (it == rank_of.end()) throw InvalidArgument("ranking does not cover gold word '" + w + "'");
        if (l == 1) ranks.push_back(it->second);
    }
    return ranks;
}

double recall_within(const std::vector<std::size_t>& ranks, std::size_t window) {
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [&](std::size_t r) { return r <= window; });
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

}  // namespace

double mu_rank(const std::vector<RankedWord>& ranked, const GoldLabels& gold) {
    const auto ranks = shifted_ranks(ranked, gold);
    const double n = static_cast<double>(gold.size());
    double sum = 0.0;
    for (std::size_t r : ranks) sum += static_cast<double>(r) / n;
    return sum / static_cast<double>(ranks.size());
}

double recall_at_fraction(const std::vector<RankedWord>& ranked, const GoldLabels& gold, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("recall_at_fraction: p must lie in (0, 1]");
    const auto ranks = shifted_ranks(ranked, gold);
    // Tolerance keeps products like 0.3·10 from rounding up to the next integer.
    const auto window = static_cast<std::size_t>(std::ceil(p * static_cast<double>(gold.size()) - 1e-9));
    return recall_within(ranks, window);
}

double recall_at_k(const std::vector<RankedWord>& ranked, const GoldLabels& gold, std::size_t k) {
    if (k == 0 || k > gold.size())
        throw InvalidArgument("recall_at_k: k = " + std::to_string(k) + " outside [1, " +
                              std::to_string(gold.size()) + "]");
    return recall_within(shifted_ranks(ranked, gold), k);
}

std::size_t default_recall_k(std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.3 * static_cast<double>(n) - 1e-9)));
}

std::vector<std::string> select_models(const std::vector<EvalReport>& reports, std::size_t top_n) {
    std::vector<const EvalReport*> order;
    for (const auto& r : reports) order.push_back(&r);
    std::sort(order.begin(), order.end(), [](const EvalReport* a, const EvalReport* b) {
        if (a->cs_avg_sw != b->cs_avg_sw) return a->cs_avg_sw > b->cs_avg_sw;
        return a->method_id < b->method_id;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < order.size() && i < top_n; ++i) out.push_back(order[i]->method_id);
    return out;
}

void write_report(const std::filesystem::path& path, const std::vector<EvalReport>& reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "method_id\tcs_avg_sw\tacc_mean\tacc_2sigma\tmu_rank\tr_p50\tr_down_k\n";
    out.setf(std::ios::fixed);
    out.precision(3);
    // Metrics that were not computed (NaN) are written as NA.
    for (const auto& r : reports) {
        out << r.method_id;
        for (double v : {r.cs_avg_sw, r.acc_mean, r.acc_2sigma, r.mu_rank, r.r_p50, r.r_down_k}) {
            out << '\t';
            if (std::isnan(v)) out << "NA";
            else out << v;
        }
        out << '\n';
    }
    if (!out) throw IoError("write error on " + path.string());
}

}  // namespace semshift
