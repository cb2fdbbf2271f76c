#include "semshift/embedder.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "semshift/error.hpp"

namespace semshift {

std::string_view algorithm_name(Algorithm a) { return a == Algorithm::CBOW ? "CBOW" : "SG"; }

Algorithm parse_algorithm(std::string_view s) {
    if (s == "CBOW" || s == "cbow") return Algorithm::CBOW;
    if (s == "SG" || s == "sg") return Algorithm::SG;
    throw InvalidArgument("unknown algorithm: " + std::string(s));
}

void TrainingConfig::validate() const {
    if (dim < 2) throw InvalidArgument("dim must be at least 2");
    if (window == 0) throw InvalidArgument("window must be positive");
    if (epochs == 0) throw InvalidArgument("epochs must be positive");
    if (!(initial_lr > 0.0)) throw InvalidArgument("initial_lr must be positive");
    if (min_lr < 0.0 || min_lr > initial_lr) throw InvalidArgument("min_lr must lie in [0, initial_lr]");
    if (subsample_t < 0.0) throw InvalidArgument("subsample_t must be nonnegative");
    if (!(unigram_power > 0.0)) throw InvalidArgument("unigram_power must be positive");
    if (min_count == 0) throw InvalidArgument("min_count must be positive");
    if (threads == 0) throw InvalidArgument("threads must be positive");
}

std::optional<std::span<const double>> EmbeddingSpace::vector(std::string_view word) const {
    if (!vocab) return std::nullopt;
    auto i = vocab->find(word);
    if (!i) return std::nullopt;
    return target.row(*i);
}

EmbeddingSpace init_space(std::shared_ptr<const Vocabulary> vocab, const TrainingConfig& config,
                          Slice slice) {
    if (!vocab || vocab->empty()) throw InvalidArgument("init_space: empty vocabulary");
    config.validate();
    EmbeddingSpace space;
    space.slice = slice;
    space.target = Matrix(vocab->size(), config.dim);
    space.context = Matrix(vocab->size(), config.dim);
    const double half = 0.5 / static_cast<double>(config.dim);
    Rng rng(config.seed);
    for (double& v : space.target.data()) v = rng.uniform(-half, half);
    space.vocab = std::move(vocab);
    return space;
}

// ---------------------------------------------------------------------------
// Sampling

UnigramTable::UnigramTable(const Vocabulary& vocab, double power) {
    if (vocab.empty()) throw InvalidArgument("unigram table over empty vocabulary");
    if (!(power > 0.0)) throw InvalidArgument("unigram power must be positive");
    probs_.resize(vocab.size());
    double z = 0.0;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        probs_[i] = std::pow(static_cast<double>(vocab.count(i)), power);
        z += probs_[i];
    }
    cumulative_.resize(probs_.size());
    double run = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        probs_[i] /= z;
        run += probs_[i];
        cumulative_[i] = run;
    }
    cumulative_.back() = 1.0;
}

std::size_t UnigramTable::sample(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), probs_.size() - 1);
}

double keep_probability(std::uint64_t count, std::uint64_t total_tokens, double t) {
    if (t <= 0.0) return 1.0;
    const double f = static_cast<double>(count) / static_cast<double>(total_tokens);
    const double p = (std::sqrt(f / t) + 1.0) * (t / f);
    return std::clamp(p, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Negative-sampling kernel

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

// log σ(x) without overflow.
double log_sigmoid(double x) {
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

}  // namespace

double negative_sampling_loss(std::span<const double> hidden, const Matrix& context,
                              std::size_t positive, std::span<const std::size_t> negatives) {
    double loss = -log_sigmoid(dot(hidden, context.row(positive)));
    for (std::size_t n : negatives) {
        if (n == positive) continue;
        loss -= log_sigmoid(-dot(hidden, context.row(n)));
    }
    return loss;
}

namespace {

inline void output_update(std::span<const double> hidden, std::span<double> out_row, double label,
                          double lr, std::span<double> hidden_step, bool update_context) {
    const std::size_t d = hidden.size();
    double f = 0.0;
    for (std::size_t k = 0; k < d; ++k) f += hidden[k] * out_row[k];
    const double g = (label - sigmoid(f)) * lr;
    for (std::size_t k = 0; k < d; ++k) hidden_step[k] += g * out_row[k];
    if (update_context)
        for (std::size_t k = 0; k < d; ++k) out_row[k] += g * hidden[k];
}

}  // namespace

void negative_sampling_step(std::span<const double> hidden, Matrix& context, std::size_t positive,
                            std::span<const std::size_t> negatives, double lr,
                            std::span<double> hidden_step, bool update_context) {
    output_update(hidden, context.row(positive), 1.0, lr, hidden_step, update_context);
    for (std::size_t n : negatives) {
        if (n == positive) continue;
        output_update(hidden, context.row(n), 0.0, lr, hidden_step, update_context);
    }
}

// ---------------------------------------------------------------------------
// Training

namespace {

using Sentence = std::vector<std::uint32_t>;

struct EncodedCorpus {
    std::vector<Sentence> sentences;
    std::uint64_t in_vocab_tokens = 0;
    std::uint64_t raw_tokens = 0;
};

EncodedCorpus encode(const SentenceCorpus& corpus, const Vocabulary& vocab) {
    EncodedCorpus enc;
    corpus.for_each_line([&](std::string_view line) {
        Sentence s;
        for (const auto& tok : tokenize_line(line)) {
            ++enc.raw_tokens;
            if (auto i = vocab.find(tok)) s.push_back(static_cast<std::uint32_t>(*i));
        }
        enc.in_vocab_tokens += s.size();
        if (!s.empty()) enc.sentences.push_back(std::move(s));
    });
    return enc;
}

class Trainer {
public:
    Trainer(EmbeddingSpace& space, const TrainingConfig& config, FreezeMask mask,
            const EncodedCorpus& corpus)
        : space_(space),
          config_(config),
          mask_(mask),
          corpus_(corpus),
          noise_(*space.vocab, config.unigram_power),
          total_updates_(static_cast<double>(config.epochs) * static_cast<double>(corpus.in_vocab_tokens) + 1.0) {
        keep_.resize(space.vocab->size());
        for (std::size_t i = 0; i < keep_.size(); ++i)
            keep_[i] = keep_probability(space.vocab->count(i), space.vocab->total_tokens(),
                                        config.subsample_t);
    }

    void run() {
        const std::size_t n_threads = std::min(config_.threads, std::max<std::size_t>(1, corpus_.sentences.size()));
        std::vector<Rng> rngs;
        for (std::size_t t = 0; t < n_threads; ++t)
            rngs.emplace_back(derive_seed(config_.seed, t));

        for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
            if (n_threads == 1) {
                work(rngs[0], 0, corpus_.sentences.size());
            } else {
                std::vector<std::jthread> pool;
                const std::size_t n = corpus_.sentences.size();
                for (std::size_t t = 0; t < n_threads; ++t)
                    pool.emplace_back([this, &rngs, t, n, n_threads] {
                        work(rngs[t], t * n / n_threads, (t + 1) * n / n_threads);
                    });
            }
            if (!space_.target.all_finite() || !space_.context.all_finite())
                throw NumericalError("non-finite weights after epoch " + std::to_string(epoch + 1));
        }
    }

private:
    double current_lr() const {
        const double progress = static_cast<double>(words_done_.load(std::memory_order_relaxed)) / total_updates_;
        const double lr = config_.initial_lr - (config_.initial_lr - config_.min_lr) * progress;
        return std::max(lr, config_.min_lr);
    }

    void work(Rng& rng, std::size_t begin, std::size_t end) {
        const std::size_t dim = space_.dim();
        std::vector<double> hidden(dim), step(dim);
        std::vector<std::size_t> negatives(config_.negative);
        Sentence kept;
        for (std::size_t s = begin; s < end; ++s) {
            const Sentence& sentence = corpus_.sentences[s];
            const double lr = current_lr();
            words_done_.fetch_add(sentence.size(), std::memory_order_relaxed);

            kept.clear();
            for (std::uint32_t w : sentence)
                if (keep_[w] >= 1.0 || keep_[w] > rng.uniform()) kept.push_back(w);

            for (std::size_t pos = 0; pos < kept.size(); ++pos) {
                const std::size_t radius = config_.window - rng.below(config_.window);
                const std::size_t lo = pos >= radius ? pos - radius : 0;
                const std::size_t hi = std::min(kept.size() - 1, pos + radius);
                if (config_.algorithm == Algorithm::SG)
                    skip_gram(rng, kept, pos, lo, hi, lr, step, negatives);
                else
                    cbow(rng, kept, pos, lo, hi, lr, hidden, step, negatives);
            }
        }
    }

    void draw_negatives(Rng& rng, std::vector<std::size_t>& negatives) const {
        for (auto& n : negatives) n = noise_.sample(rng);
    }

    void skip_gram(Rng& rng, const Sentence& sent, std::size_t pos, std::size_t lo, std::size_t hi,
                   double lr, std::vector<double>& step, std::vector<std::size_t>& negatives) {
        const std::size_t center = sent[pos];
        for (std::size_t c = lo; c <= hi; ++c) {
            if (c == pos) continue;
            auto input = space_.target.row(sent[c]);
            std::fill(step.begin(), step.end(), 0.0);
            draw_negatives(rng, negatives);
            negative_sampling_step(input, space_.context, center, negatives, lr, step,
                                   !mask_.freeze_context);
            if (!mask_.freeze_target)
                for (std::size_t k = 0; k < step.size(); ++k) input[k] += step[k];
        }
    }

    // Hidden layer is the mean of the context vectors; every context vector then
    // receives the full hidden-layer step, as in the reference word2vec toolkit.
    void cbow(Rng& rng, const Sentence& sent, std::size_t pos, std::size_t lo, std::size_t hi,
              double lr, std::vector<double>& hidden, std::vector<double>& step,
              std::vector<std::size_t>& negatives) {
        std::fill(hidden.begin(), hidden.end(), 0.0);
        std::size_t n_ctx = 0;
        for (std::size_t c = lo; c <= hi; ++c) {
            if (c == pos) continue;
            auto v = space_.target.row(sent[c]);
            for (std::size_t k = 0; k < hidden.size(); ++k) hidden[k] += v[k];
            ++n_ctx;
        }
        if (n_ctx == 0) return;
        for (double& h : hidden) h /= static_cast<double>(n_ctx);
        std::fill(step.begin(), step.end(), 0.0);
        draw_negatives(rng, negatives);
        negative_sampling_step(hidden, space_.context, sent[pos], negatives, lr, step,
                               !mask_.freeze_context);
        if (mask_.freeze_target) return;
        for (std::size_t c = lo; c <= hi; ++c) {
            if (c == pos) continue;
            auto v = space_.target.row(sent[c]);
            for (std::size_t k = 0; k < step.size(); ++k) v[k] += step[k];
        }
    }

    EmbeddingSpace& space_;
    const TrainingConfig& config_;
    FreezeMask mask_;
    const EncodedCorpus& corpus_;
    UnigramTable noise_;
    std::vector<double> keep_;
    double total_updates_;
    std::atomic<std::uint64_t> words_done_{0};
};

}  // namespace

EmbeddingSpace train(const SentenceCorpus& corpus, EmbeddingSpace space,
                     const TrainingConfig& config, FreezeMask mask) {
    config.validate();
    if (mask.freeze_target && mask.freeze_context)
        throw InvalidArgument("freeze mask freezes both matrices; training would be a no-op");
    if (!space.vocab || space.vocab->empty()) throw InvalidArgument("train: space has no vocabulary");
    if (space.target.rows() != space.vocab->size() || space.context.rows() != space.vocab->size() ||
        space.context.cols() != space.target.cols() || space.dim() != config.dim)
        throw InvalidArgument("train: space shape does not match its vocabulary or config");

    const EncodedCorpus enc = encode(corpus, *space.vocab);
    if (enc.raw_tokens > 0 && enc.in_vocab_tokens == 0)
        throw InvalidArgument("train: vocabulary mismatch, no token of " + corpus.describe() +
                              " is in the space vocabulary");
    if (enc.sentences.empty()) return space;

    Trainer trainer(space, config, mask, enc);
    trainer.run();
    return space;
}

// ---------------------------------------------------------------------------
// word2vec text format

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

double parse_double(std::string_view s, const std::filesystem::path& path) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError("malformed number '" + std::string(s) + "' in " + path.string());
    return v;
}

}  // namespace

void write_word2vec(const std::filesystem::path& path, const Vocabulary& vocab, const Matrix& m) {
    if (m.rows() != vocab.size()) throw InvalidArgument("write_word2vec: row count differs from vocabulary");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << m.rows() << ' ' << m.cols() << '\n';
    std::string line;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        line = vocab.word(i);
        for (double v : m.row(i)) {
            line += ' ';
            append_double(line, v);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write error on " + path.string());
}

std::pair<std::vector<std::string>, Matrix> read_word2vec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("missing header in " + path.string());
    const auto header = tokenize_line(line);
    if (header.size() != 2) throw IoError("malformed header in " + path.string());
    const auto rows = static_cast<std::size_t>(parse_double(header[0], path));
    const auto cols = static_cast<std::size_t>(parse_double(header[1], path));
    std::vector<std::string> words;
    words.reserve(rows);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw IoError("truncated file " + path.string());
        const auto toks = tokenize_line(line);
        if (toks.size() != cols + 1)
            throw IoError("row " + std::to_string(i + 1) + " of " + path.string() + " has wrong width");
        words.push_back(toks[0]);
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = parse_double(toks[j + 1], path);
    }
    return {std::move(words), std::move(m)};
}

std::filesystem::path context_path(const std::filesystem::path& vec_path) {
    auto p = vec_path;
    p.replace_extension(".ctx");
    return p;
}

void save_space(const std::filesystem::path& path, const EmbeddingSpace& space) {
    write_word2vec(path, *space.vocab, space.target);
    write_word2vec(context_path(path), *space.vocab, space.context);
}

EmbeddingSpace load_space(const std::filesystem::path& path, std::shared_ptr<const Vocabulary> vocab,
                          Slice slice, const std::filesystem::path& ctx_path) {
    auto check = [&](const std::vector<std::string>& words, const std::filesystem::path& p) {
        if (words.size() != vocab->size())
            throw InvalidArgument(p.string() + " has " + std::to_string(words.size()) +
                                  " rows but the vocabulary has " + std::to_string(vocab->size()));
        for (std::size_t i = 0; i < words.size(); ++i)
            if (words[i] != vocab->word(i))
                throw InvalidArgument(p.string() + " row " + std::to_string(i + 1) +
                                      " does not match the vocabulary");
    };
    auto [words, target] = read_word2vec(path);
    check(words, path);
    const auto cpath = ctx_path.empty() ? context_path(path) : ctx_path;
    auto [cwords, context] = read_word2vec(cpath);
    check(cwords, cpath);
    if (context.cols() != target.cols()) throw InvalidArgument("target and context widths differ");
    EmbeddingSpace space;
    space.slice = slice;
    space.vocab = std::move(vocab);
    space.target = std::move(target);
    space.context = std::move(context);
    return space;
}

}  // namespace semshift
