#include "semshift/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

#include "semshift/error.hpp"
#include "semshift/rng.hpp"

namespace semshift {

namespace {

std::size_t words_per_topic(const DriftSpec& spec) { return (spec.vocab_size - spec.filler_words) / spec.topics; }

class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double exponent) : cumulative_(n) {
        double run = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            run += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
            cumulative_[r] = run;
        }
        for (double& c : cumulative_) c /= run;
        cumulative_.back() = 1.0;
    }

    std::size_t sample(Rng& rng) const {
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), rng.uniform());
        return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
    }

private:
    std::vector<double> cumulative_;
};

std::string join(const std::vector<std::string>& tokens) {
    std::string line;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) line += ' ';
        line += tokens[i];
    }
    return line;
}

}  // namespace

void DriftSpec::validate() const {
    if (topics == 0) throw InvalidArgument("synthgen: topics must be positive");
    if (filler_words == 0) throw InvalidArgument("synthgen: need at least one filler word");
    if (vocab_size < filler_words + 2 * topics)
        throw InvalidArgument("synthgen: vocab_size too small for the filler words and topics");
    if (sentences_per_slice == 0 || sentence_length == 0)
        throw InvalidArgument("synthgen: sentences_per_slice and sentence_length must be positive");
    if (replace_prob < 0.0 || replace_prob > 1.0) throw InvalidArgument("synthgen: replace_prob outside [0, 1]");
    if (filler_prob < 0.0 || filler_prob >= 1.0) throw InvalidArgument("synthgen: filler_prob outside [0, 1)");
    if (stable_tail_fraction <= 0.0 || stable_tail_fraction > 1.0)
        throw InvalidArgument("synthgen: stable_tail_fraction outside (0, 1]");

    std::set<std::string> used;
    std::set<std::string> vocab;
    for (std::size_t i = 0; i < filler_words; ++i) vocab.insert(filler_word(i));
    for (std::size_t t = 0; t < topics; ++t)
        for (std::size_t r = 0; r < words_per_topic(*this); ++r) vocab.insert(topic_word(t, r));
    for (const auto& [r, d] : shift_pairs) {
        if (r == d) throw InvalidArgument("synthgen: recipient equals donor (" + r + ")");
        // A word in two pairs would be swapped back and forth.
        if (!used.insert(r).second) throw InvalidArgument("synthgen: word in more than one shift pair: " + r);
        if (!used.insert(d).second) throw InvalidArgument("synthgen: word in more than one shift pair: " + d);
        if (!vocab.count(r) || !vocab.count(d))
            throw InvalidArgument("synthgen: shift pair (" + r + ", " + d + ") names a word outside the vocabulary");
    }
}

std::string topic_word(std::size_t topic, std::size_t rank) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "t%02zu_w%04zu", topic, rank);
    return buf;
}

std::string filler_word(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sw%03zu", i);
    return buf;
}

std::vector<std::pair<std::string, std::string>> default_shift_pairs(const DriftSpec& spec, std::size_t n) {
    if (spec.topics < 2) throw InvalidArgument("default_shift_pairs: need at least two topics");
    std::vector<std::pair<std::string, std::string>> pairs;
    const std::size_t per_topic = words_per_topic(spec);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t topic = i % spec.topics;
        const std::size_t donor_topic = (topic + std::max<std::size_t>(1, spec.topics / 2)) % spec.topics;
        // Mid-frequency words: frequent enough to train well, not corpus-dominating.
        // Recipients take odd ranks and donors the next even rank, so no word repeats.
        const std::size_t rank = 5 + 2 * (i / spec.topics);
        if (rank + 1 >= per_topic) throw InvalidArgument("default_shift_pairs: too many pairs for the topic size");
        pairs.emplace_back(topic_word(topic, rank), topic_word(donor_topic, rank + 1));
    }
    return pairs;
}

SynthBundle generate(const DriftSpec& spec) {
    spec.validate();
    const std::size_t per_topic = words_per_topic(spec);
    Rng rng(spec.seed);
    const ZipfSampler topic_sampler(per_topic, spec.zipf_exponent);
    const ZipfSampler filler_sampler(spec.filler_words, spec.zipf_exponent);

    SynthBundle bundle;
    std::vector<std::vector<std::string>> topic_names(spec.topics);
    for (std::size_t t = 0; t < spec.topics; ++t)
        for (std::size_t r = 0; r < per_topic; ++r) {
            topic_names[t].push_back(topic_word(t, r));
            bundle.topic_of[topic_names[t].back()] = static_cast<int>(t);
        }
    std::vector<std::string> fillers;
    for (std::size_t i = 0; i < spec.filler_words; ++i) {
        fillers.push_back(filler_word(i));
        bundle.topic_of[fillers.back()] = -1;
    }
    bundle.stopwords = fillers;

    auto draw_slice = [&](std::vector<std::string>& lines) {
        lines.reserve(spec.sentences_per_slice);
        std::vector<std::string> tokens(spec.sentence_length);
        for (std::size_t s = 0; s < spec.sentences_per_slice; ++s) {
            const std::size_t topic = rng.below(spec.topics);
            for (auto& tok : tokens)
                tok = rng.uniform() < spec.filler_prob ? fillers[filler_sampler.sample(rng)]
                                                       : topic_names[topic][topic_sampler.sample(rng)];
            lines.push_back(join(tokens));
        }
    };
    draw_slice(bundle.t0_lines);
    draw_slice(bundle.t1_lines);

    std::unordered_map<std::string, std::string> swap;
    for (const auto& [r, d] : spec.shift_pairs) {
        swap[d] = r;
        swap[r] = d;
    }
    if (!swap.empty()) {
        for (auto& line : bundle.t1_lines) {
            auto tokens = tokenize_line(line);
            bool changed = false;
            for (auto& tok : tokens) {
                auto it = swap.find(tok);
                if (it == swap.end()) continue;
                if (spec.replace_prob >= 1.0 || rng.uniform() < spec.replace_prob) {
                    tok = it->second;
                    changed = true;
                }
            }
            if (changed) line = join(tokens);
        }
    }

    std::set<std::string> recipients, donors;
    for (const auto& [r, d] : spec.shift_pairs) {
        recipients.insert(r);
        donors.insert(d);
    }
    const auto tail =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(spec.stable_tail_fraction * static_cast<double>(per_topic))));
    for (const auto& r : recipients) bundle.gold.labels[r] = 1;
    for (std::size_t t = 0; t < spec.topics; ++t)
        for (std::size_t r = per_topic - tail; r < per_topic; ++r) {
            const auto& w = topic_names[t][r];
            if (!recipients.count(w) && !donors.count(w)) bundle.gold.labels[w] = 0;
        }

    // Frequency floor for every gold word in both slices.
    for (const auto* lines : {&bundle.t0_lines, &bundle.t1_lines}) {
        std::unordered_map<std::string, std::uint64_t> counts;
        for (const auto& line : *lines)
            for (auto& tok : tokenize_line(line)) ++counts[std::move(tok)];
        for (auto it = bundle.gold.labels.begin(); it != bundle.gold.labels.end();) {
            const auto c = counts[it->first];
            if (c >= spec.min_count) {
                ++it;
                continue;
            }
            if (it->second == 1)
                throw InvalidArgument("synthgen: shifted word " + it->first + " occurs only " + std::to_string(c) +
                                      " times in a slice; increase sentences_per_slice");
            it = bundle.gold.labels.erase(it);
        }
    }
    if (bundle.gold.labels.size() == recipients.size())
        throw InvalidArgument("synthgen: no stable word reaches min_count; increase sentences_per_slice");
    return bundle;
}

TestSet emit_testset(const SynthBundle& bundle, std::size_t stable_n, std::size_t shifted_n, std::uint64_t seed) {
    std::vector<std::string> stable, shifted;
    for (const auto& [w, l] : bundle.gold.labels) (l == 1 ? shifted : stable).push_back(w);
    if (stable.size() < stable_n || shifted.size() < shifted_n)
        throw InvalidArgument("emit_testset: asked for " + std::to_string(stable_n) + " stable and " +
                              std::to_string(shifted_n) + " shifted words but only " + std::to_string(stable.size()) +
                              " and " + std::to_string(shifted.size()) + " are available");
    Rng rng(seed);
    auto sample = [&](std::vector<std::string>& pool, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
        pool.resize(n);
    };
    sample(stable, stable_n);
    sample(shifted, shifted_n);

    TestSet out;
    for (const auto& w : stable) out.gold.labels[w] = 0;
    for (const auto& w : shifted) out.gold.labels[w] = 1;
    out.words = out.gold.words();
    return out;
}

BundleFiles write_bundle(const std::filesystem::path& dir, const SynthBundle& bundle, const TestSet& test) {
    std::filesystem::create_directories(dir);
    BundleFiles files{dir / "t0.txt", dir / "t1.txt", dir / "stopwords.txt", dir / "gold.tsv", dir / "testset.txt"};
    auto write_lines = [](const std::filesystem::path& p, const std::vector<std::string>& lines) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot write " + p.string());
        for (const auto& l : lines) out << l << '\n';
        if (!out) throw IoError("write error on " + p.string());
    };
    write_lines(files.corpus_t0, bundle.t0_lines);
    write_lines(files.corpus_t1, bundle.t1_lines);
    write_lines(files.stopwords, bundle.stopwords);
    write_lines(files.testset, test.words);
    write_gold(files.gold, test.gold);
    return files;
}

}  // namespace semshift
