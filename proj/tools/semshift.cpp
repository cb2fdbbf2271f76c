// Command-line driver: train -> score -> classify -> evaluate, plus synth and report-hist.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "semshift/pipeline.hpp"
#include "semshift/synthgen.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct Overrides {
    std::string config;
    std::vector<std::pair<std::string, std::string>> settings;
};

// Registers the shared flags; each one lands in `overrides` as a config key.
void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "Run configuration file (key = value)");
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            name, [&o, key](const std::string& v) { o.settings.emplace_back(key, v); }, help);
    };
    flag("--seed", "seed", "Random seed");
    flag("--threads", "threads", "Training threads (1 = deterministic)");
    flag("--methods", "methods", "Comma-separated method ids, e.g. OP_SW_CBOW,TWEC_CBOW");
    flag("--rule", "rules", "Classification rule(s): MEAN, MEAN_MINUS_2SIGMA");
    flag("--k", "k", "Window of the bottom-k recall (default ceil(0.3 N))");
    flag("--p", "p", "Fraction for the recall-at-fraction metric");
    flag("--workdir", "workdir", "Output directory");
    flag("--corpus-t0", "corpus_t0", "Corpus of the first time slice");
    flag("--corpus-t1", "corpus_t1", "Corpus of the second time slice");
    flag("--stopwords", "stopwords", "Stop-word list");
    flag("--testset", "testset", "Test words, one per line");
    flag("--gold", "gold", "Gold labels TSV");
    flag("--dim", "dim", "Embedding dimension");
    flag("--epochs", "epochs", "Training epochs");
    flag("--min-count", "min_count", "Vocabulary frequency floor");
    flag("--bins", "hist_bins", "Histogram bins");
    flag("--set", "hist_set", "Histogram word set (SW or CW)");
    cmd->add_option_function<std::vector<std::string>>(
        "-o,--option",
        [&o](const std::vector<std::string>& kvs) {
            for (const auto& kv : kvs) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw CLI::ValidationError("--option", "expected key=value");
                o.settings.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
            }
        },
        "Any config key as key=value (repeatable)");
}

semshift::RunConfig resolve(const Overrides& o) {
    semshift::RunConfig config;
    if (!o.config.empty()) config.load_file(o.config);
    for (const auto& [k, v] : o.settings) config.set(k, v);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lexical semantic change detection between two time-sliced corpora"};
    app.require_subcommand(1);

    Overrides overrides;
    auto* train = app.add_subcommand("train", "Train independent and compass embeddings");
    auto* score = app.add_subcommand("score", "Align/map spaces and write per-word cosine scores");
    auto* classify = app.add_subcommand("classify", "Label test words by the threshold rule(s)");
    auto* evaluate = app.add_subcommand("evaluate", "Compute the metric panel against gold labels");
    auto* hist = app.add_subcommand("report-hist", "Write cosine histograms over a word set");
    for (auto* c : {train, score, classify, evaluate, hist}) add_common(c, overrides);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus pair with injected shifts");
    std::string synth_out = "synth";
    semshift::DriftSpec spec;
    std::size_t shifted_n = 6, stable_n = 12, pairs_n = 0;
    synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
    synth->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
    synth->add_option("--vocab-size", spec.vocab_size, "Vocabulary size")->capture_default_str();
    synth->add_option("--topics", spec.topics, "Topic clusters")->capture_default_str();
    synth->add_option("--sentences", spec.sentences_per_slice, "Sentences per slice")->capture_default_str();
    synth->add_option("--sentence-length", spec.sentence_length, "Tokens per sentence")->capture_default_str();
    synth->add_option("--replace-prob", spec.replace_prob, "Swap probability of shift pairs")->capture_default_str();
    synth->add_option("--shifted", shifted_n, "Shifted test words (and shift pairs)")->capture_default_str();
    synth->add_option("--stable", stable_n, "Stable test words")->capture_default_str();
    synth->add_option("--zipf", spec.zipf_exponent, "Zipf exponent of word frequencies")->capture_default_str();
    synth->add_option("--pairs", pairs_n, "Shift pairs to inject (default: --shifted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (synth->parsed()) {
            spec.shift_pairs = semshift::default_shift_pairs(spec, std::max(pairs_n, shifted_n));
            const auto bundle = semshift::generate(spec);
            const auto test = semshift::emit_testset(bundle, stable_n, shifted_n, spec.seed);
            const auto files = semshift::write_bundle(synth_out, bundle, test);
            std::ofstream conf(std::filesystem::path(synth_out) / "run.conf");
            conf << "# generated by semshift synth\n"
                 << "corpus_t0 = t0.txt\ncorpus_t1 = t1.txt\nstopwords = stopwords.txt\n"
                 << "testset = testset.txt\ngold = gold.tsv\nworkdir = work\n"
                 << "methods = OP_SW_CBOW,OP_CW_CBOW,LR_SW_CBOW,FFNN_SW_CBOW,TWEC_CBOW\n"
                 << "seed = " << spec.seed << "\nthreads = 1\n";
            std::cout << "synth: wrote " << files.corpus_t0.parent_path().string() << " ("
                      << bundle.t0_lines.size() << " sentences per slice, " << test.words.size() << " test words)\n";
            return 0;
        }
        const auto config = resolve(overrides);
        if (train->parsed()) semshift::cmd_train(config, std::cerr);
        if (score->parsed()) semshift::cmd_score(config, std::cerr);
        if (classify->parsed()) semshift::cmd_classify(config, std::cerr);
        if (hist->parsed()) semshift::cmd_report_hist(config, std::cerr);
        if (evaluate->parsed()) {
            semshift::cmd_evaluate(config, std::cerr);
            std::ifstream report(semshift::WorkLayout{config.workdir}.report_file());
            std::cout << report.rdbuf();
            std::ifstream selection(semshift::WorkLayout{config.workdir}.selection_file());
            std::cout << selection.rdbuf();
        }
    } catch (const semshift::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const semshift::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
