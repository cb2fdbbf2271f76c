#include "semshift/compass.hpp"

#include <cassert>

#include "semshift/error.hpp"

namespace semshift {

EmbeddingSpace train_compass(const SentenceCorpus& merged, const TrainingConfig& config) {
    config.validate();
    auto vocab = std::make_shared<const Vocabulary>(build_vocabulary(merged, config.min_count));
    auto space = init_space(std::move(vocab), config, Slice::Merged);
    space = train(merged, std::move(space), config, {});
    space.origin = SpaceOrigin::CompassBase;
    return space;
}

EmbeddingSpace train_slice(const SentenceCorpus& slice, const EmbeddingSpace& base,
                           const TrainingConfig& config, CompassFreeze freeze) {
    if (base.origin != SpaceOrigin::CompassBase)
        throw ContractViolation("train_slice expects a compass base model");
    EmbeddingSpace space = base;
    space.slice = slice.slice();
    FreezeMask mask;
    mask.freeze_context = freeze == CompassFreeze::Context;
    mask.freeze_target = freeze == CompassFreeze::Target;
    space = train(slice, std::move(space), config, mask);
    space.origin = SpaceOrigin::CompassSlice;
    assert(freeze != CompassFreeze::Context || space.context == base.context);
    return space;
}

CompassModel compass_pipeline(const SentenceCorpus& c0, const SentenceCorpus& c1,
                              const TrainingConfig& config, CompassFreeze freeze) {
    CompassModel model;
    model.base = train_compass(SentenceCorpus::concat(c0, c1), config);
    model.t0 = train_slice(c0, model.base, config, freeze);
    model.t1 = train_slice(c1, model.base, config, freeze);
    model.t0.slice = Slice::T0;
    model.t1.slice = Slice::T1;
    return model;
}

void save_compass(const std::filesystem::path& dir, const CompassModel& model) {
    std::filesystem::create_directories(dir);
    save_space(dir / "base.vec", model.base);
    write_word2vec(dir / "t0.vec", *model.t0.vocab, model.t0.target);
    write_word2vec(dir / "t1.vec", *model.t1.vocab, model.t1.target);
}

CompassModel load_compass(const std::filesystem::path& dir, std::shared_ptr<const Vocabulary> vocab) {
    CompassModel model;
    const auto ctx = dir / "base.ctx";
    model.base = load_space(dir / "base.vec", vocab, Slice::Merged, ctx);
    model.base.origin = SpaceOrigin::CompassBase;
    model.t0 = load_space(dir / "t0.vec", vocab, Slice::T0, ctx);
    model.t0.origin = SpaceOrigin::CompassSlice;
    model.t1 = load_space(dir / "t1.vec", vocab, Slice::T1, ctx);
    model.t1.origin = SpaceOrigin::CompassSlice;
    return model;
}

}  // namespace semshift
