#include "semshift/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "semshift/error.hpp"

namespace semshift {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

}  // namespace

std::string_view slice_name(Slice s) {
    switch (s) {
        case Slice::T0: return "T0";
        case Slice::T1: return "T1";
        case Slice::Merged: return "merged";
    }
    return "?";
}

std::vector<std::string> tokenize_line(std::string_view line) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        const std::size_t start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        if (i > start) tokens.emplace_back(line.substr(start, i - start));
    }
    return tokens;
}

// ---------------------------------------------------------------------------
// SentenceCorpus

SentenceCorpus SentenceCorpus::from_file(Slice slice, std::filesystem::path path) {
    SentenceCorpus c;
    c.slice_ = slice;
    c.sources_.push_back({std::move(path), nullptr});
    return c;
}

SentenceCorpus SentenceCorpus::from_lines(Slice slice, std::vector<std::string> lines) {
    SentenceCorpus c;
    c.slice_ = slice;
    c.sources_.push_back({{}, std::make_shared<const std::vector<std::string>>(std::move(lines))});
    return c;
}

SentenceCorpus SentenceCorpus::concat(const SentenceCorpus& a, const SentenceCorpus& b) {
    SentenceCorpus c;
    c.slice_ = Slice::Merged;
    c.sources_ = a.sources_;
    c.sources_.insert(c.sources_.end(), b.sources_.begin(), b.sources_.end());
    return c;
}

void SentenceCorpus::for_each_line(const std::function<void(std::string_view)>& fn) const {
    for (const auto& src : sources_) {
        if (src.lines) {
            for (const auto& line : *src.lines) fn(line);
            continue;
        }
        auto in = open_for_read(src.path);
        std::string line;
        while (std::getline(in, line)) fn(line);
        if (in.bad()) throw IoError("read error on " + src.path.string());
    }
}

void SentenceCorpus::for_each_sentence(
    const std::function<void(const std::vector<std::string>&)>& fn) const {
    for_each_line([&](std::string_view line) { fn(tokenize_line(line)); });
}

std::size_t SentenceCorpus::sentence_count() const {
    std::size_t n = 0;
    for_each_line([&](std::string_view) { ++n; });
    return n;
}

std::string SentenceCorpus::describe() const {
    std::string out(slice_name(slice_));
    out += ":";
    for (const auto& src : sources_) out += " " + (src.lines ? std::string("<memory>") : src.path.string());
    return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<Entry> entries, std::uint64_t min_count)
    : entries_(std::move(entries)), min_count_(min_count) {
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.word < b.word;
    });
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.count == 0) throw InvalidArgument("vocabulary entry with zero count: " + e.word);
        if (e.word.empty()) throw InvalidArgument("vocabulary entry with empty word");
        if (!index_.emplace(e.word, i).second)
            throw InvalidArgument("duplicate vocabulary word: " + e.word);
        total_tokens_ += e.count;
    }
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Vocabulary build_vocabulary(const SentenceCorpus& corpus, std::uint64_t min_count) {
    if (min_count == 0) throw InvalidArgument("min_count must be positive");
    std::unordered_map<std::string, std::uint64_t> counts;
    corpus.for_each_line([&](std::string_view line) {
        for (auto& tok : tokenize_line(line)) ++counts[std::move(tok)];
    });
    std::vector<Vocabulary::Entry> entries;
    for (auto& [w, c] : counts)
        if (c >= min_count) entries.push_back({w, c});
    if (entries.empty()) throw InvalidArgument("empty vocabulary: " + corpus.describe());
    return Vocabulary(std::move(entries), min_count);
}

// ---------------------------------------------------------------------------
// Word sets

std::string_view word_set_name(WordSetKind k) {
    switch (k) {
        case WordSetKind::SW: return "SW";
        case WordSetKind::CW: return "CW";
        case WordSetKind::TEST: return "TEST";
    }
    return "?";
}

std::size_t WordSet::dropped() const {
    return static_cast<std::size_t>(std::count_if(
        report.begin(), report.end(), [](const auto& r) { return r.second != Status::Kept; }));
}

WordSet common_words(const Vocabulary& v0, const Vocabulary& v1, const WordSet* exclude) {
    if (v0.empty() || v1.empty()) throw InvalidArgument("common_words: empty vocabulary");
    WordSet cw;
    cw.kind = WordSetKind::CW;
    for (const auto& e : v0.entries()) {
        if (!v1.contains(e.word)) continue;
        if (exclude && exclude->contains(e.word)) continue;
        cw.words.insert(e.word);
    }
    if (cw.words.empty()) throw InvalidArgument("common_words: empty intersection");
    cw.provenance = "shared vocabulary words";
    if (exclude) cw.provenance += " excluding " + std::string(word_set_name(exclude->kind));
    for (const auto& w : cw.words) cw.report.emplace_back(w, WordSet::Status::Kept);
    return cw;
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    std::vector<std::string> words;
    std::set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        for (auto& tok : tokenize_line(line))
            if (seen.insert(tok).second) words.push_back(std::move(tok));
    }
    return words;
}

WordSet load_stopwords(const std::filesystem::path& path, const Vocabulary& v0, const Vocabulary& v1) {
    const auto candidates = read_word_list(path);
    if (candidates.empty()) throw InvalidArgument("stop-word file is empty: " + path.string());
    WordSet sw;
    sw.kind = WordSetKind::SW;
    sw.provenance = path.string();
    for (const auto& w : candidates) {
        auto status = WordSet::Status::Kept;
        if (!v0.contains(w))
            status = WordSet::Status::DroppedT0;
        else if (!v1.contains(w))
            status = WordSet::Status::DroppedT1;
        if (status == WordSet::Status::Kept) sw.words.insert(w);
        sw.report.emplace_back(w, status);
    }
    if (sw.words.empty())
        throw InvalidArgument("no stop word of " + path.string() + " occurs in both vocabularies");
    return sw;
}

void write_word_set_report(const std::filesystem::path& path, const WordSet& set) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& [w, status] : set.report) {
        out << w << '\t';
        switch (status) {
            case WordSet::Status::Kept: out << "kept"; break;
            case WordSet::Status::DroppedT0: out << "dropped_T0"; break;
            case WordSet::Status::DroppedT1: out << "dropped_T1"; break;
        }
        out << '\n';
    }
    if (!out) throw IoError("write error on " + path.string());
}

}  // namespace semshift
