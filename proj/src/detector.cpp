#include "semshift/detector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "semshift/error.hpp"

namespace semshift {

std::string MethodId::str() const {
    std::string out;
    switch (method) {
        case Method::OP: out = "OP"; break;
        case Method::LR: out = "LR"; break;
        case Method::FFNN: out = "FFNN"; break;
        case Method::TWEC: out = "TWEC"; break;
    }
    if (trainset) out += "_" + std::string(word_set_name(*trainset));
    out += "_" + std::string(algorithm_name(algorithm));
    return out;
}

MethodId parse_method_id(std::string_view s) {
    auto fail = [&]() -> MethodId {
        throw InvalidArgument("method id '" + std::string(s) +
                              "' does not match METHOD[_TRAINSET]_ALGO with METHOD in {OP,LR,FFNN,TWEC}, "
                              "TRAINSET in {SW,CW} (absent for TWEC), ALGO in {CBOW,SG}");
    };
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find('_', start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    MethodId id;
    const auto head = parts.front();
    if (head == "OP") id.method = Method::OP;
    else if (head == "LR") id.method = Method::LR;
    else if (head == "FFNN") id.method = Method::FFNN;
    else if (head == "TWEC") id.method = Method::TWEC;
    else return fail();

    const std::size_t expected = id.method == Method::TWEC ? 2 : 3;
    if (parts.size() != expected) return fail();
    if (expected == 3) {
        if (parts[1] == "SW") id.trainset = WordSetKind::SW;
        else if (parts[1] == "CW") id.trainset = WordSetKind::CW;
        else return fail();
    }
    if (parts.back() == "CBOW") id.algorithm = Algorithm::CBOW;
    else if (parts.back() == "SG") id.algorithm = Algorithm::SG;
    else return fail();
    return id;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw InvalidArgument("cosine: vectors differ in length");
    // One square root of the product keeps cosine(u, u) exactly 1.
    const double uu = dot(u, u);
    const double vv = dot(v, v);
    if (uu == 0.0 || vv == 0.0) throw InvalidArgument("cosine: zero-norm vector");
    return std::clamp(dot(u, v) / std::sqrt(uu * vv), -1.0, 1.0);
}

std::optional<double> ChangeScoreTable::score(const std::string& w) const {
    auto it = scores.find(w);
    if (it == scores.end()) return std::nullopt;
    return it->second;
}

namespace {

void add_score(ChangeScoreTable& t, const std::string& w, std::span<const double> a, std::span<const double> b) {
    if (norm2(a) == 0.0 || norm2(b) == 0.0 || !std::isfinite(norm2(a)) || !std::isfinite(norm2(b))) {
        t.unscorable.insert(w);
        return;
    }
    t.scores[w] = cosine(a, b);
}

}  // namespace

ChangeScoreTable score_direct(const EmbeddingSpace& s0, const EmbeddingSpace& s1_aligned,
                              std::span<const std::string> words, std::string method_id) {
    for (const auto* s : {&s0, &s1_aligned})
        if (s->origin != SpaceOrigin::Independent && !s->aligned_by.empty())
            throw ContractViolation("compass spaces are directly comparable and must not be paired with "
                                    "an alignment map (found map trained on " + s->aligned_by + ")");
    if ((s0.origin == SpaceOrigin::CompassSlice) != (s1_aligned.origin == SpaceOrigin::CompassSlice))
        throw ContractViolation("score_direct: cannot compare a compass slice with an independent space");
    if (s0.dim() != s1_aligned.dim()) throw InvalidArgument("score_direct: spaces differ in dimension");
    ChangeScoreTable t;
    t.method_id = std::move(method_id);
    for (const auto& w : words) {
        auto a = s0.vector(w);
        auto b = s1_aligned.vector(w);
        if (!a || !b) {
            t.unscorable.insert(w);
            continue;
        }
        add_score(t, w, *a, *b);
    }
    return t;
}

ChangeScoreTable score_predictive(const Matrix& predicted, const EmbeddingSpace& s1,
                                  std::span<const std::string> words, std::string method_id) {
    if (predicted.rows() != words.size())
        throw InvalidArgument("score_predictive: " + std::to_string(predicted.rows()) + " predicted rows for " +
                              std::to_string(words.size()) + " words");
    if (predicted.cols() != s1.dim()) throw InvalidArgument("score_predictive: width mismatch");
    ChangeScoreTable t;
    t.method_id = std::move(method_id);
    for (std::size_t i = 0; i < words.size(); ++i) {
        auto b = s1.vector(words[i]);
        if (!b) {
            t.unscorable.insert(words[i]);
            continue;
        }
        add_score(t, words[i], predicted.row(i), *b);
    }
    return t;
}

std::string_view rule_name(Rule r) { return r == Rule::Mean ? "MEAN" : "MEAN_MINUS_2SIGMA"; }

Rule parse_rule(std::string_view s) {
    if (s == "MEAN" || s == "mean") return Rule::Mean;
    if (s == "MEAN_MINUS_2SIGMA" || s == "mean-2sigma") return Rule::MeanMinus2Sigma;
    throw InvalidArgument("unknown rule '" + std::string(s) + "' (expected MEAN or MEAN_MINUS_2SIGMA)");
}

ThresholdStats threshold_stats(const ChangeScoreTable& table, Rule rule, const std::vector<std::string>* population) {
    std::vector<double> values;
    if (population) {
        for (const auto& w : *population)
            if (auto s = table.score(w)) values.push_back(*s);
    } else {
        for (const auto& [w, s] : table.scores) values.push_back(s);
    }
    if (values.empty()) throw InvalidArgument("threshold_stats: no scored words");
    // Deviations from the first value keep a constant population at sigma = 0 exactly.
    const double n = static_cast<double>(values.size());
    const double origin = values.front();
    double shift = 0.0;
    for (double v : values) shift += v - origin;
    shift /= n;
    const double mean = origin + shift;
    double var = 0.0;
    for (double v : values) var += (v - origin - shift) * (v - origin - shift);
    var /= n;

    ThresholdStats st;
    st.mean = mean;
    st.std = std::sqrt(var);
    st.rule = rule;
    st.cutoff = rule == Rule::Mean ? mean : mean - 2.0 * st.std;
    return st;
}

int LabelTable::label_of(const std::string& w) const {
    auto it = labels.find(w);
    return it == labels.end() ? 0 : it->second;
}

std::set<std::string> LabelTable::shifted() const {
    std::set<std::string> out;
    for (const auto& [w, l] : labels)
        if (l == 1) out.insert(w);
    return out;
}

LabelTable classify(const ChangeScoreTable& table, const ThresholdStats& stats,
                    std::span<const std::string> test_words) {
    LabelTable out;
    out.rule = stats.rule;
    out.method_id = table.method_id;
    for (const auto& w : test_words) {
        if (auto s = table.score(w))
            out.labels[w] = *s < stats.cutoff ? 1 : 0;
        else
            out.defaulted.push_back(w);
    }
    return out;
}

std::vector<RankedWord> rank_ascending(const ChangeScoreTable& table, std::span<const std::string> test_words) {
    std::vector<RankedWord> out;
    std::set<std::string> seen;
    for (const auto& w : test_words)
        if (auto s = table.score(w); s && seen.insert(w).second) out.push_back({w, *s, 0});
    std::sort(out.begin(), out.end(), [](const RankedWord& a, const RankedWord& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.word < b.word;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
    return out;
}

std::vector<HistogramBin> histogram(const ChangeScoreTable& table, const std::set<std::string>& word_set,
                                    std::size_t bins) {
    if (bins == 0) throw InvalidArgument("histogram: bins must be positive");
    std::vector<HistogramBin> out(bins);
    const double width = 2.0 / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].low = -1.0 + width * static_cast<double>(b);
        out[b].high = b + 1 == bins ? 1.0 : -1.0 + width * static_cast<double>(b + 1);
    }
    for (const auto& w : word_set) {
        auto s = table.score(w);
        if (!s) continue;
        auto b = static_cast<std::size_t>(std::floor((*s + 1.0) / width));
        b = std::min(b, bins - 1);
        // Guard against rounding at interior edges.
        while (b > 0 && *s < out[b].low) --b;
        while (b + 1 < bins && *s >= out[b].high) ++b;
        ++out[b].count;
    }
    return out;
}

// ---------------------------------------------------------------------------
// TSV

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::vector<std::pair<std::string, std::string>> read_pairs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::pair<std::string, std::string>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected two tab-separated fields");
        rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return rows;
}

}  // namespace

void write_scores(const std::filesystem::path& path, const ChangeScoreTable& table) {
    std::map<std::string, std::string> rows;
    for (const auto& [w, s] : table.scores) rows[w] = format_double(s);
    for (const auto& w : table.unscorable) rows[w] = "NA";
    auto out = open_out(path);
    for (const auto& [w, s] : rows) out << w << '\t' << s << '\n';
    if (!out) throw IoError("write error on " + path.string());
}

ChangeScoreTable read_scores(const std::filesystem::path& path, std::string method_id) {
    ChangeScoreTable t;
    t.method_id = std::move(method_id);
    for (auto& [w, v] : read_pairs(path)) {
        if (v == "NA") {
            t.unscorable.insert(w);
            continue;
        }
        double d = 0.0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), d);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
            throw IoError("malformed score '" + v + "' in " + path.string());
        t.scores[w] = d;
    }
    return t;
}

void write_labels(const std::filesystem::path& path, const LabelTable& labels) {
    std::map<std::string, int> rows = labels.labels;
    for (const auto& w : labels.defaulted) rows.emplace(w, 0);
    auto out = open_out(path);
    for (const auto& [w, l] : rows) out << w << '\t' << l << '\n';
    if (!out) throw IoError("write error on " + path.string());
}

std::map<std::string, int> read_labels(const std::filesystem::path& path) {
    std::map<std::string, int> labels;
    for (auto& [w, v] : read_pairs(path)) {
        if (v != "0" && v != "1") throw IoError("label '" + v + "' is not binary in " + path.string());
        labels[w] = v == "1" ? 1 : 0;
    }
    return labels;
}

void write_histogram(const std::filesystem::path& path, const std::vector<HistogramBin>& bins) {
    auto out = open_out(path);
    for (const auto& b : bins) out << format_double(b.low) << '\t' << format_double(b.high) << '\t' << b.count << '\n';
    if (!out) throw IoError("write error on " + path.string());
}

}  // namespace semshift
