#pragma once

#include <filesystem>
#include <memory>

#include "semshift/corpus.hpp"
#include "semshift/embedder.hpp"

namespace semshift {

/// Which matrix the slice passes inherit from the base model and keep fixed.
/// `Context` is the standard compass procedure; `Target` exists for ablations.
enum class CompassFreeze { Context, Target };

/// Base model over the merged corpus plus one directly comparable space per slice.
struct CompassModel {
    EmbeddingSpace base;
    EmbeddingSpace t0;
    EmbeddingSpace t1;

    const EmbeddingSpace& slice(Slice s) const { return s == Slice::T1 ? t1 : t0; }
};

/// Trains the base model over `merged`, with a vocabulary built from it.
EmbeddingSpace train_compass(const SentenceCorpus& merged, const TrainingConfig& config);

/// Warm-starts from `base`, freezes the matrix named by `freeze` and trains the other on `slice`.
EmbeddingSpace train_slice(const SentenceCorpus& slice, const EmbeddingSpace& base,
                           const TrainingConfig& config, CompassFreeze freeze = CompassFreeze::Context);

CompassModel compass_pipeline(const SentenceCorpus& c0, const SentenceCorpus& c1,
                              const TrainingConfig& config, CompassFreeze freeze = CompassFreeze::Context);

/// Writes base.vec, base.ctx, t0.vec and t1.vec into `dir`.
void save_compass(const std::filesystem::path& dir, const CompassModel& model);

/// Reads a model written by save_compass; the slices take their context from base.ctx.
CompassModel load_compass(const std::filesystem::path& dir, std::shared_ptr<const Vocabulary> vocab);

}  // namespace semshift
