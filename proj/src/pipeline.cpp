#include "semshift/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "semshift/procrustes.hpp"

namespace semshift {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// RunConfig

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T v{};
    auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size())
        throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    try {
        if (key == "corpus_t0") corpus_t0 = value;
        else if (key == "corpus_t1") corpus_t1 = value;
        else if (key == "stopwords") stopwords = value;
        else if (key == "testset") testset = value;
        else if (key == "gold") gold = value;
        else if (key == "workdir") workdir = value;
        else if (key == "methods") methods = split_list(value);
        else if (key == "rules" || key == "rule") {
            rules.clear();
            for (const auto& r : split_list(value)) rules.push_back(parse_rule(r));
        }
        else if (key == "dim") training.dim = parse_number<std::size_t>(key, value);
        else if (key == "window") training.window = parse_number<std::size_t>(key, value);
        else if (key == "negative") training.negative = parse_number<std::size_t>(key, value);
        else if (key == "epochs") training.epochs = parse_number<std::size_t>(key, value);
        else if (key == "initial_lr") training.initial_lr = parse_number<double>(key, value);
        else if (key == "min_lr") training.min_lr = parse_number<double>(key, value);
        else if (key == "subsample_t") training.subsample_t = parse_number<double>(key, value);
        else if (key == "unigram_power") training.unigram_power = parse_number<double>(key, value);
        else if (key == "min_count") training.min_count = parse_number<std::uint64_t>(key, value);
        else if (key == "seed") training.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "threads") training.threads = parse_number<std::size_t>(key, value);
        else if (key == "k") k = parse_number<std::size_t>(key, value);
        else if (key == "p") p = parse_number<double>(key, value);
        else if (key == "top_n") top_n = parse_number<std::size_t>(key, value);
        else if (key == "ffnn_hidden") ffnn.hidden = parse_number<std::size_t>(key, value);
        else if (key == "ffnn_epochs") ffnn.epochs = parse_number<std::size_t>(key, value);
        else if (key == "ffnn_lr") ffnn.learning_rate = parse_number<double>(key, value);
        else if (key == "ffnn_batch") ffnn.batch_size = parse_number<std::size_t>(key, value);
        else if (key == "lr_bias") lr_bias = parse_bool(key, value);
        else if (key == "threshold_population") {
            if (value == "all") population = ThresholdPopulation::AllScored;
            else if (value == "test") population = ThresholdPopulation::TestWords;
            else throw ConfigError("threshold_population must be 'all' or 'test'");
        }
        else if (key == "compass_freeze") {
            if (value == "context") compass_freeze = CompassFreeze::Context;
            else if (value == "target") compass_freeze = CompassFreeze::Target;
            else throw ConfigError("compass_freeze must be 'context' or 'target'");
        }
        else if (key == "hist_bins") hist_bins = parse_number<std::size_t>(key, value);
        else if (key == "hist_set") {
            if (value == "SW") hist_set = WordSetKind::SW;
            else if (value == "CW") hist_set = WordSetKind::CW;
            else throw ConfigError("hist_set must be SW or CW");
        }
        else throw ConfigError("unknown config key '" + key + "'");
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

void RunConfig::load_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        std::string value = trim(line.substr(eq + 1));
        const std::string key = trim(line.substr(0, eq));
        // Relative paths resolve against the config file's directory.
        if ((key == "corpus_t0" || key == "corpus_t1" || key == "stopwords" || key == "testset" || key == "gold" ||
             key == "workdir") &&
            !value.empty() && fs::path(value).is_relative())
            value = (path.parent_path() / value).lexically_normal().string();
        set(key, value);
    }
}

std::vector<MethodId> RunConfig::parsed_methods() const {
    if (methods.empty()) throw ConfigError("no methods configured");
    std::vector<MethodId> out;
    for (const auto& m : methods) {
        try {
            out.push_back(parse_method_id(m));
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    return out;
}

std::string RunConfig::hash() const {
    std::ostringstream s;
    s.precision(17);
    s << "dim=" << training.dim << ";window=" << training.window << ";negative=" << training.negative
      << ";epochs=" << training.epochs << ";initial_lr=" << training.initial_lr << ";min_lr=" << training.min_lr
      << ";subsample_t=" << training.subsample_t << ";unigram_power=" << training.unigram_power
      << ";min_count=" << training.min_count << ";seed=" << training.seed << ";threads=" << training.threads
      << ";k=" << k << ";p=" << p << ";ffnn=" << ffnn.hidden << "," << ffnn.epochs << "," << ffnn.learning_rate
      << "," << ffnn.batch_size << ";lr_bias=" << lr_bias << ";population=" << static_cast<int>(population)
      << ";freeze=" << static_cast<int>(compass_freeze) << ";methods=";
    auto sorted = methods;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& m : sorted) s << m << ",";
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Layout

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

fs::path WorkLayout::ind_dir(Algorithm a) const { return root / "ind" / lower(algorithm_name(a)); }
fs::path WorkLayout::compass_dir(Algorithm a) const { return root / "cmps" / lower(algorithm_name(a)); }
fs::path WorkLayout::score_file(const std::string& m) const { return root / "scores" / (m + ".tsv"); }
fs::path WorkLayout::label_file(const std::string& m, Rule r) const {
    return root / "labels" / (m + "." + std::string(rule_name(r)) + ".tsv");
}
fs::path WorkLayout::map_file(const std::string& m) const { return root / "maps" / (m + ".map"); }
fs::path WorkLayout::report_file() const { return root / "report.tsv"; }
fs::path WorkLayout::selection_file() const { return root / "selection.txt"; }
fs::path WorkLayout::hist_file(const std::string& m, WordSetKind set) const {
    return root / "hist" / (m + "." + std::string(word_set_name(set)) + ".tsv");
}
fs::path WorkLayout::wordset_report(WordSetKind set) const {
    return root / ("wordset." + std::string(word_set_name(set)) + ".tsv");
}

void write_sidecar(const fs::path& file, const RunConfig& config) {
    auto meta = file;
    meta += ".meta";
    std::ofstream out(meta, std::ios::binary);
    if (!out) throw IoError("cannot write " + meta.string());
    out << "config_hash=" << config.hash() << " seed=" << config.training.seed << '\n';
}

// ---------------------------------------------------------------------------
// Stages

namespace {

void require_file(const fs::path& p, const std::string& what) {
    if (p.empty()) throw ConfigError(what + " path is not configured");
    if (!fs::exists(p)) throw ConfigError(what + " not found: " + p.string());
}

// Wraps a stage so module errors surface with the stage name.
template <typename F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw Error(name + ": " + e.what());
    }
}

SentenceCorpus corpus(const RunConfig& c, Slice s) {
    return SentenceCorpus::from_file(s, s == Slice::T0 ? c.corpus_t0 : c.corpus_t1);
}

struct Vocabs {
    std::shared_ptr<const Vocabulary> v0, v1;
};

Vocabs slice_vocabs(const RunConfig& c) {
    return {std::make_shared<const Vocabulary>(build_vocabulary(corpus(c, Slice::T0), c.training.min_count)),
            std::make_shared<const Vocabulary>(build_vocabulary(corpus(c, Slice::T1), c.training.min_count))};
}

std::shared_ptr<const Vocabulary> merged_vocab(const RunConfig& c) {
    return std::make_shared<const Vocabulary>(build_vocabulary(
        SentenceCorpus::concat(corpus(c, Slice::T0), corpus(c, Slice::T1)), c.training.min_count));
}

std::vector<std::string> test_words(const RunConfig& c) {
    if (!c.testset.empty()) {
        require_file(c.testset, "test set");
        return read_word_list(c.testset);
    }
    if (!c.gold.empty()) {
        require_file(c.gold, "gold file");
        return read_gold(c.gold).words();
    }
    throw ConfigError("a test set (or gold file) is required");
}

void validate_inputs(const RunConfig& c) {
    require_file(c.corpus_t0, "corpus_t0");
    require_file(c.corpus_t1, "corpus_t1");
    c.parsed_methods();
    try {
        c.training.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

std::set<Algorithm> algorithms_for(const std::vector<MethodId>& ids, bool compass) {
    std::set<Algorithm> out;
    for (const auto& id : ids)
        if ((id.method == Method::TWEC) == compass) out.insert(id.algorithm);
    return out;
}

fs::path prerequisite(const fs::path& p) {
    if (!fs::exists(p)) throw ConfigError("missing prerequisite file " + p.string() + " (run the earlier stage first)");
    return p;
}

}  // namespace

void cmd_train(const RunConfig& config, std::ostream& log) {
    validate_inputs(config);
    const WorkLayout layout{config.workdir};
    const auto ids = config.parsed_methods();
    TrainingConfig tc = config.training;

    for (Algorithm a : algorithms_for(ids, false)) {
        tc.algorithm = a;
        const auto dir = layout.ind_dir(a);
        fs::create_directories(dir);
        stage("train IND " + std::string(algorithm_name(a)), [&] {
            for (Slice s : {Slice::T0, Slice::T1}) {
                const auto c = corpus(config, s);
                auto vocab = std::make_shared<const Vocabulary>(build_vocabulary(c, tc.min_count));
                log << "train: IND " << algorithm_name(a) << " " << slice_name(s) << " |V|=" << vocab->size() << "\n";
                auto space = train(c, init_space(vocab, tc, s), tc);
                const auto path = dir / (s == Slice::T0 ? "t0.vec" : "t1.vec");
                save_space(path, space);
                write_sidecar(path, config);
                write_sidecar(context_path(path), config);
            }
        });
    }
    for (Algorithm a : algorithms_for(ids, true)) {
        tc.algorithm = a;
        const auto dir = layout.compass_dir(a);
        stage("train CMPS " + std::string(algorithm_name(a)), [&] {
            log << "train: CMPS " << algorithm_name(a) << "\n";
            const auto model = compass_pipeline(corpus(config, Slice::T0), corpus(config, Slice::T1), tc,
                                                config.compass_freeze);
            save_compass(dir, model);
            for (const char* f : {"base.vec", "base.ctx", "t0.vec", "t1.vec"}) write_sidecar(dir / f, config);
        });
    }
}

void cmd_score(const RunConfig& config, std::ostream& log) {
    validate_inputs(config);
    require_file(config.stopwords, "stop-word file");
    const WorkLayout layout{config.workdir};
    const auto ids = config.parsed_methods();
    const auto tests = test_words(config);

    const Vocabs vocabs = stage("score: vocabularies", [&] { return slice_vocabs(config); });
    const auto& v0 = vocabs.v0;
    const auto& v1 = vocabs.v1;
    const WordSet sw = stage("score: stop words", [&] { return load_stopwords(config.stopwords, *v0, *v1); });
    const WordSet cw = stage("score: common words", [&] { return common_words(*v0, *v1, &sw); });
    fs::create_directories(layout.root / "scores");
    fs::create_directories(layout.root / "maps");
    write_word_set_report(layout.wordset_report(WordSetKind::SW), sw);
    if (sw.dropped() > 0) log << "score: dropped " << sw.dropped() << " stop words absent from a slice\n";

    std::set<std::string> word_set;
    for (const auto& w : common_words(*v0, *v1).words) word_set.insert(w);
    word_set.insert(tests.begin(), tests.end());
    const std::vector<std::string> words(word_set.begin(), word_set.end());
    for (const auto& w : tests)
        if (!v0->contains(w) || !v1->contains(w)) log << "score: warning: test word '" << w << "' is unscorable\n";

    std::shared_ptr<const Vocabulary> vm;
    for (const auto& id : ids) {
        const std::string name = id.str();
        ChangeScoreTable table = stage("score " + name, [&] {
            if (id.method == Method::TWEC) {
                if (!vm) vm = merged_vocab(config);
                const auto dir = layout.compass_dir(id.algorithm);
                for (const char* f : {"base.vec", "base.ctx", "t0.vec", "t1.vec"}) prerequisite(dir / f);
                const auto model = load_compass(dir, vm);
                return score_direct(model.t0, model.t1, words, name);
            }
            const auto dir = layout.ind_dir(id.algorithm);
            for (const char* f : {"t0.vec", "t1.vec", "t0.ctx", "t1.ctx"}) prerequisite(dir / f);
            const auto s0 = load_space(dir / "t0.vec", v0, Slice::T0, dir / "t0.ctx");
            const auto s1 = load_space(dir / "t1.vec", v1, Slice::T1, dir / "t1.ctx");
            const WordSet& anchors = *id.trainset == WordSetKind::SW ? sw : cw;
            std::vector<std::size_t> i0, i1;
            for (const auto& w : anchors.words) {
                i0.push_back(*v0->find(w));
                i1.push_back(*v1->find(w));
            }
            const Matrix a0 = gather_rows(s0.target, i0);
            const Matrix a1 = gather_rows(s1.target, i1);
            const std::string set_name(word_set_name(anchors.kind));

            if (id.method == Method::OP) {
                const auto map = solve_orthogonal(a1, a0, set_name);
                save_map(layout.map_file(name), map);
                write_sidecar(layout.map_file(name), config);
                return score_direct(s0, apply_map(s1, map), words, name);
            }

            std::vector<std::string> scorable;
            std::vector<std::size_t> rows;
            for (const auto& w : words)
                if (auto i = v0->find(w); i && v1->contains(w)) {
                    scorable.push_back(w);
                    rows.push_back(*i);
                }
            const Matrix x = gather_rows(s0.target, rows);
            Matrix predicted;
            if (id.method == Method::LR) {
                auto map = fit_linear(a0, a1, config.lr_bias);
                map.anchor_set = set_name;
                if (map.rank_deficient)
                    log << "score: " << name << ": anchor system is rank deficient; using damped minimum-norm fit\n";
                save_linear_map(layout.map_file(name), map);
                write_sidecar(layout.map_file(name), config);
                predicted = predict(map, x);
            } else {
                FfnnConfig fc = config.ffnn;
                fc.seed = config.training.seed;
                auto map = fit_ffnn(a0, a1, fc);
                map.anchor_set = set_name;
                save_neural_map(layout.map_file(name), map);
                write_sidecar(layout.map_file(name), config);
                predicted = predict(map, x);
            }
            auto t = score_predictive(predicted, s1, scorable, name);
            for (const auto& w : words)
                if (!t.scores.count(w)) t.unscorable.insert(w);
            return t;
        });
        const auto path = layout.score_file(name);
        write_scores(path, table);
        write_sidecar(path, config);
        log << "score: " << name << " scored=" << table.scores.size() << " unscorable=" << table.unscorable.size()
            << "\n";
    }
}

void cmd_classify(const RunConfig& config, std::ostream& log) {
    const WorkLayout layout{config.workdir};
    const auto ids = config.parsed_methods();
    const auto tests = test_words(config);
    if (config.rules.empty()) throw ConfigError("no classification rule configured");
    fs::create_directories(layout.root / "labels");
    for (const auto& id : ids) {
        const std::string name = id.str();
        const auto table = read_scores(prerequisite(layout.score_file(name)), name);
        for (Rule rule : config.rules) {
            const auto stats = stage("classify " + name, [&] {
                return threshold_stats(table, rule,
                                       config.population == ThresholdPopulation::TestWords ? &tests : nullptr);
            });
            const auto labels = classify(table, stats, tests);
            for (const auto& w : labels.defaulted)
                log << "classify: warning: " << name << ": test word '" << w << "' unscorable, labelled 0\n";
            const auto path = layout.label_file(name, rule);
            write_labels(path, labels);
            write_sidecar(path, config);
            log << "classify: " << name << " " << rule_name(rule) << " mean=" << stats.mean << " std=" << stats.std
                << " cutoff=" << stats.cutoff << " shifted=" << labels.shifted().size() << "\n";
        }
    }
}

std::vector<EvalReport> cmd_evaluate(const RunConfig& config, std::ostream& log) {
    if (config.gold.empty()) throw ConfigError("evaluation requires gold labels (set 'gold')");
    require_file(config.gold, "gold file");
    require_file(config.stopwords, "stop-word file");
    validate_inputs(config);
    const WorkLayout layout{config.workdir};
    const auto ids = config.parsed_methods();
    const GoldLabels gold = read_gold(config.gold);
    const auto gold_words = gold.words();
    const Vocabs vocabs = slice_vocabs(config);
    const auto& v0 = vocabs.v0;
    const auto& v1 = vocabs.v1;
    const WordSet sw = load_stopwords(config.stopwords, *v0, *v1);
    const std::size_t k = config.k == 0 ? default_recall_k(gold.size()) : config.k;

    std::vector<EvalReport> reports;
    for (const auto& id : ids) {
        const std::string name = id.str();
        const auto table = read_scores(prerequisite(layout.score_file(name)), name);
        // Only the configured rules are evaluated; the others stay NA.
        std::map<Rule, std::map<std::string, int>> labels;
        for (const Rule rule : config.rules) labels[rule] = read_labels(prerequisite(layout.label_file(name, rule)));
        reports.push_back(stage("evaluate " + name, [&] {
            constexpr double na = std::numeric_limits<double>::quiet_NaN();
            EvalReport r{name, na, na, na, na, na, na};
            r.cs_avg_sw = avg_anchor_cosine(table, sw.words);
            if (labels.count(Rule::Mean)) r.acc_mean = accuracy(labels.at(Rule::Mean), gold);
            if (labels.count(Rule::MeanMinus2Sigma)) r.acc_2sigma = accuracy(labels.at(Rule::MeanMinus2Sigma), gold);
            if (gold.shifted().empty()) {
                log << "evaluate: warning: " << name << ": gold has no shifted words, rank metrics are NA\n";
                return r;
            }
            auto ranked = rank_ascending(table, gold_words);
            // Unscorable gold words rank after every scored word.
            for (const auto& w : gold_words)
                if (!table.score(w)) {
                    log << "evaluate: warning: " << name << ": gold word '" << w << "' unscorable, ranked last\n";
                    ranked.push_back({w, 1.0, ranked.size() + 1});
                }
            r.mu_rank = mu_rank(ranked, gold);
            r.r_p50 = recall_at_fraction(ranked, gold, config.p);
            r.r_down_k = recall_at_k(ranked, gold, k);
            return r;
        }));
    }
    write_report(layout.report_file(), reports);
    write_sidecar(layout.report_file(), config);
    const auto selected = select_models(reports, config.top_n);
    {
        std::ofstream out(layout.selection_file(), std::ios::binary);
        if (!out) throw IoError("cannot write " + layout.selection_file().string());
        out << "selected";
        for (const auto& m : selected) out << '\t' << m;
        out << '\n';
    }
    write_sidecar(layout.selection_file(), config);
    log << "evaluate: selected (by CS_avg^SW):";
    for (const auto& m : selected) log << " " << m;
    log << "\n";
    return reports;
}

void cmd_report_hist(const RunConfig& config, std::ostream& log) {
    require_file(config.stopwords, "stop-word file");
    validate_inputs(config);
    const WorkLayout layout{config.workdir};
    const Vocabs vocabs = slice_vocabs(config);
    const auto& v0 = vocabs.v0;
    const auto& v1 = vocabs.v1;
    const WordSet sw = load_stopwords(config.stopwords, *v0, *v1);
    const WordSet set = config.hist_set == WordSetKind::SW ? sw : common_words(*v0, *v1, &sw);
    fs::create_directories(layout.root / "hist");
    for (const auto& id : config.parsed_methods()) {
        const std::string name = id.str();
        const auto table = read_scores(prerequisite(layout.score_file(name)), name);
        const auto path = layout.hist_file(name, config.hist_set);
        write_histogram(path, histogram(table, set.words, config.hist_bins));
        write_sidecar(path, config);
        log << "report-hist: wrote " << path.string() << "\n";
    }
}

}  // namespace semshift
