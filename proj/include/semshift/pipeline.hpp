#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "semshift/compass.hpp"
#include "semshift/detector.hpp"
#include "semshift/embedder.hpp"
#include "semshift/error.hpp"
#include "semshift/evaluator.hpp"
#include "semshift/mapper.hpp"

namespace semshift {

/// Invalid run configuration or missing input; reported before any work starts.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class ThresholdPopulation { AllScored, TestWords };

/// Everything one pipeline run needs. See README for the config-file keys.
struct RunConfig {
    std::filesystem::path corpus_t0;
    std::filesystem::path corpus_t1;
    std::filesystem::path stopwords;
    std::filesystem::path testset;
    std::filesystem::path gold;
    std::filesystem::path workdir = "work";

    TrainingConfig training;
    std::vector<std::string> methods = {"TWEC_CBOW"};
    std::vector<Rule> rules = {Rule::Mean, Rule::MeanMinus2Sigma};
    std::size_t k = 0;  // 0 means ⌈0.3·N⌉
    double p = 0.5;
    std::size_t top_n = 4;

    FfnnConfig ffnn;
    bool lr_bias = true;
    ThresholdPopulation population = ThresholdPopulation::AllScored;
    CompassFreeze compass_freeze = CompassFreeze::Context;
    std::size_t hist_bins = 20;
    WordSetKind hist_set = WordSetKind::SW;

    /// Sets one `key = value` setting. Throws ConfigError on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Reads a flat `key = value` file; `#` starts a comment.
    void load_file(const std::filesystem::path& path);

    std::vector<MethodId> parsed_methods() const;
    /// Stable hash of every setting that influences outputs.
    std::string hash() const;
};

/// Output locations under `workdir`.
struct WorkLayout {
    std::filesystem::path root;

    std::filesystem::path ind_dir(Algorithm a) const;
    std::filesystem::path compass_dir(Algorithm a) const;
    std::filesystem::path score_file(const std::string& method_id) const;
    std::filesystem::path label_file(const std::string& method_id, Rule rule) const;
    std::filesystem::path map_file(const std::string& method_id) const;
    std::filesystem::path report_file() const;
    std::filesystem::path selection_file() const;
    std::filesystem::path hist_file(const std::string& method_id, WordSetKind set) const;
    std::filesystem::path wordset_report(WordSetKind set) const;
};

/// Trains every embedding space the configured methods need.
void cmd_train(const RunConfig& config, std::ostream& log);
/// Writes one score TSV per method.
void cmd_score(const RunConfig& config, std::ostream& log);
/// Writes one label TSV per (method, rule).
void cmd_classify(const RunConfig& config, std::ostream& log);
/// Writes the metric report and the model-selection line; returns the rows.
std::vector<EvalReport> cmd_evaluate(const RunConfig& config, std::ostream& log);
/// Writes a histogram TSV per method over the configured word set.
void cmd_report_hist(const RunConfig& config, std::ostream& log);

/// Writes `<file>.meta` holding the config hash and seed.
void write_sidecar(const std::filesystem::path& file, const RunConfig& config);

}  // namespace semshift
