#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semshift/corpus.hpp"
#include "semshift/matrix.hpp"
#include "semshift/rng.hpp"

namespace semshift {

enum class Algorithm { CBOW, SG };

std::string_view algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

/// Hyperparameters of one training run. Defaults follow the usual word2vec toolkit settings.
struct TrainingConfig {
    Algorithm algorithm = Algorithm::CBOW;
    std::size_t dim = 100;
    std::size_t window = 5;
    std::size_t negative = 5;
    std::size_t epochs = 5;
    double initial_lr = 0.025;
    double min_lr = 0.0001;
    double subsample_t = 1e-3;
    double unigram_power = 0.75;
    std::uint64_t min_count = 5;
    std::uint64_t seed = 1;
    std::size_t threads = 1;

    /// Throws InvalidArgument on an inconsistent configuration.
    void validate() const;
};

/// How a space was produced; the detector uses it to police alignment misuse.
enum class SpaceOrigin { Independent, CompassBase, CompassSlice };

/// Target (word) and context (output) matrices over one vocabulary.
struct EmbeddingSpace {
    Slice slice = Slice::T0;
    std::shared_ptr<const Vocabulary> vocab;
    Matrix target;
    Matrix context;
    SpaceOrigin origin = SpaceOrigin::Independent;
    /// Name of the anchor set of an applied orthogonal map; empty when unaligned.
    std::string aligned_by;

    std::size_t dim() const { return target.cols(); }
    /// Target vector of `word`, or nullopt when the word is out of vocabulary.
    std::optional<std::span<const double>> vector(std::string_view word) const;
};

struct FreezeMask {
    bool freeze_target = false;
    bool freeze_context = false;
};

/// Target rows uniform in [-0.5/dim, 0.5/dim) drawn from `config.seed`; context zero.
EmbeddingSpace init_space(std::shared_ptr<const Vocabulary> vocab, const TrainingConfig& config,
                          Slice slice = Slice::T0);

/// Smoothed unigram noise distribution for negative sampling.
class UnigramTable {
public:
    UnigramTable(const Vocabulary& vocab, double power = 0.75);

    double probability(std::size_t i) const { return probs_[i]; }
    std::size_t size() const { return probs_.size(); }
    std::size_t sample(Rng& rng) const;

private:
    std::vector<double> probs_;
    std::vector<double> cumulative_;
};

/// Frequent-word subsampling: (√(f/t) + 1)·t/f clamped to [0, 1], f = count/total.
double keep_probability(std::uint64_t count, std::uint64_t total_tokens, double t);

double sigmoid(double x);

/// Negative-sampling loss −log σ(h·c₊) − Σ log σ(−h·c₋) for one output group.
double negative_sampling_loss(std::span<const double> hidden, const Matrix& context,
                              std::size_t positive, std::span<const std::size_t> negatives);

/// One SGD step on the negative-sampling loss for one output group.
///
/// Adds −lr·∂L/∂h into `hidden_step` and, unless `update_context` is false, moves each
/// output row by −lr·∂L/∂c in place. Negatives equal to `positive` are skipped.
void negative_sampling_step(std::span<const double> hidden, Matrix& context, std::size_t positive,
                            std::span<const std::size_t> negatives, double lr,
                            std::span<double> hidden_step, bool update_context);

/// Runs `config.epochs` passes of CBOW or skip-gram with negative sampling over `corpus`.
///
/// Frozen matrices are left bit-identical. With threads > 1 workers update the shared
/// matrices without locks; only threads == 1 is reproducible.
EmbeddingSpace train(const SentenceCorpus& corpus, EmbeddingSpace space,
                     const TrainingConfig& config, FreezeMask mask = {});

// word2vec text format: header `|V| dim`, then `word v1 ... vdim` per row.

void write_word2vec(const std::filesystem::path& path, const Vocabulary& vocab, const Matrix& m);
std::pair<std::vector<std::string>, Matrix> read_word2vec(const std::filesystem::path& path);

/// Context file path that sits next to a `.vec` file.
std::filesystem::path context_path(const std::filesystem::path& vec_path);

/// Writes `path` and its `.ctx` sibling.
void save_space(const std::filesystem::path& path, const EmbeddingSpace& space);

/// Reads a space whose rows must match `vocab` word for word; throws otherwise.
/// `ctx_path` defaults to the `.ctx` sibling of `path`.
EmbeddingSpace load_space(const std::filesystem::path& path, std::shared_ptr<const Vocabulary> vocab,
                          Slice slice, const std::filesystem::path& ctx_path = {});

}  // namespace semshift
