// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "semshift/compass.hpp"
#include "semshift/detector.hpp"
#include "semshift/embedder.hpp"
#include "semshift/evaluator.hpp"
#include "semshift/mapper.hpp"
#include "semshift/pipeline.hpp"
#include "semshift/procrustes.hpp"
#include "semshift/synthgen.hpp"

using namespace semshift;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const std::string& id, const std::string& title, const std::function<Outcome()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %s (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id.c_str(), title.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), f, a);
    return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// --- 1 ---------------------------------------------------------------------

Outcome procrustes_recovery() {
    const auto start = std::chrono::steady_clock::now();
    const Matrix w0 = oracle::gaussian(500, 50, 1);
    const Matrix r = oracle::random_orthogonal(50, 2);
    std::vector<std::size_t> anchors(100);
    for (std::size_t i = 0; i < 100; ++i) anchors[i] = 5 * i;

    auto recover = [&](double noise) {
        Matrix w1 = oracle::matmul(w0, r);
        if (noise > 0) {
            const Matrix e = oracle::gaussian(500, 50, 3, noise);
            for (std::size_t i = 0; i < w1.data().size(); ++i) w1.data()[i] += e.data()[i];
        }
        auto map = solve_orthogonal(gather_rows(w1, anchors), gather_rows(w0, anchors));
        EmbeddingSpace s;
        s.slice = Slice::T1;
        s.target = w1;
        return oracle::mean_row_cosine(apply_map(s, map).target, w0);
    };
    const double clean = recover(0.0), noisy = recover(0.01);
    const double secs = elapsed_since(start);
    return {clean >= 0.999 && noisy >= 0.99 && secs < 5.0,
            fmt("clean mean cosine %.6f (>= 0.999), ", clean) + fmt("noisy %.6f (>= 0.99), ", noisy) +
                fmt("%.2fs (< 5s)", secs)};
}

// --- 2 ---------------------------------------------------------------------

Outcome svd_correctness() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 gen(7);
    double worst_rec = 0.0, worst_orth = 0.0;
    bool ordered = true;
    for (int t = 0; t < 50; ++t) {
        const std::size_t m = 1 + gen() % 100, n = 1 + gen() % 100;
        const Matrix a = oracle::gaussian(m, n, 100 + t);
        const auto d = svd(a);
        Matrix us = d.u;
        for (std::size_t i = 0; i < us.rows(); ++i)
            for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= d.singular_values[j];
        worst_rec = std::max(worst_rec, oracle::fro_diff(oracle::matmul(us, oracle::mat_t(d.v)), a) / oracle::fro(a));
        worst_orth = std::max({worst_orth, oracle::orthogonality_error(d.u), oracle::orthogonality_error(d.v)});
        for (std::size_t i = 1; i < d.singular_values.size(); ++i)
            ordered = ordered && d.singular_values[i] <= d.singular_values[i - 1];
    }
    const double secs = elapsed_since(start);
    return {worst_rec <= 1e-8 && worst_orth <= 1e-8 && ordered && secs < 30.0,
            fmt("max relative reconstruction %.2e (<= 1e-8), ", worst_rec) +
                fmt("max orthogonality residual %.2e (<= 1e-8), ", worst_orth) +
                (ordered ? "nonincreasing, " : "ORDER VIOLATED, ") + fmt("%.2fs (< 30s)", secs)};
}

// --- 3 ---------------------------------------------------------------------

Outcome linear_recovery() {
    const Matrix w0 = oracle::gaussian(200, 50, 11);
    const Matrix m = oracle::gaussian(50, 50, 12);
    const Matrix bm = oracle::gaussian(1, 50, 13);
    Matrix w1 = oracle::matmul(w0, m);
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t j = 0; j < 50; ++j) w1(i, j) += bm(0, j);
    const auto map = fit_linear(w0, w1);
    const double rel = oracle::fro_diff(predict(map, w0), w1) / oracle::fro(w1);

    const auto id = fit_linear(w0, w0);
    double id_err = (oracle::to_eigen(id.weights) - Eigen::MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff();
    for (double b : id.bias) id_err = std::max(id_err, std::abs(b));
    return {rel <= 1e-6 && id_err <= 1e-6,
            fmt("residual/||W1|| %.2e (<= 1e-6), ", rel) + fmt("identity max deviation %.2e (<= 1e-6)", id_err)};
}

// --- 4 ---------------------------------------------------------------------

Outcome gradient_checks() {
    // SGNS micro-batch at dim 8.
    const std::size_t dim = 8;
    Matrix ctx = oracle::gaussian(6, dim, 21, 0.5);
    std::vector<double> h(dim);
    const Matrix hm = oracle::gaussian(1, dim, 22, 0.5);
    std::copy(hm.data().begin(), hm.data().end(), h.begin());
    const std::vector<std::size_t> negs{0, 2, 5};
    const std::size_t pos = 3;
    const double lr = 1e-3;
    Matrix updated = ctx;
    std::vector<double> step(dim, 0.0);
    negative_sampling_step(h, updated, pos, negs, lr, step, true);
    auto sg_loss = [&] { return negative_sampling_loss(h, ctx, pos, negs); };
    double sgns = 0.0;
    for (std::size_t k = 0; k < dim; ++k)
        sgns = std::max(sgns, oracle::relative_error(-step[k] / lr, oracle::central_difference(sg_loss, h[k])));
    for (std::size_t r : {pos, negs[0], negs[1], negs[2]})
        for (std::size_t k = 0; k < dim; ++k)
            sgns = std::max(sgns, oracle::relative_error(-(updated(r, k) - ctx(r, k)) / lr,
                                                         oracle::central_difference(sg_loss, ctx(r, k))));

    // FFNN at dim 6.
    FfnnConfig cfg;
    cfg.epochs = 0;
    const Matrix x = oracle::gaussian(9, 6, 23);
    const Matrix y = oracle::gaussian(9, 6, 24);
    NeuralMap net = fit_ffnn(x, y, cfg);
    for (auto& layer : net.layers) {
        const Matrix j = oracle::gaussian(layer.weights.rows(), layer.weights.cols(), 25, 0.3);
        for (std::size_t i = 0; i < j.data().size(); ++i) layer.weights.data()[i] += j.data()[i];
    }
    const auto g = ffnn_gradients(net, x, y);
    auto nn_loss = [&] { return ffnn_loss(net, x, y); };
    double ffnn = 0.0;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        for (std::size_t i = 0; i < net.layers[l].weights.data().size(); ++i)
            ffnn = std::max(ffnn, oracle::relative_error(g.layers[l].weights.data()[i],
                                                         oracle::central_difference(nn_loss, net.layers[l].weights.data()[i])));
        for (std::size_t i = 0; i < net.layers[l].bias.size(); ++i)
            ffnn = std::max(ffnn, oracle::relative_error(g.layers[l].bias[i],
                                                         oracle::central_difference(nn_loss, net.layers[l].bias[i])));
    }
    return {sgns <= 1e-4 && ffnn <= 1e-4,
            fmt("SGNS max relative error %.2e, ", sgns) + fmt("FFNN %.2e (<= 1e-4)", ffnn)};
}

// --- 5 ---------------------------------------------------------------------

DriftSpec small_spec(std::size_t topics) {
    DriftSpec s;
    s.vocab_size = 400;
    s.topics = topics;
    s.filler_words = 20;
    s.sentences_per_slice = 10000;
    return s;
}

Outcome freeze_contract() {
    auto spec = small_spec(4);
    spec.shift_pairs = default_shift_pairs(spec, 2);
    const auto b = generate(spec);
    TrainingConfig cfg;
    cfg.dim = 20;
    cfg.epochs = 2;
    const auto c0 = b.corpus_t0();
    auto vocab = std::make_shared<const Vocabulary>(build_vocabulary(c0, cfg.min_count));
    auto init = init_space(vocab, cfg);
    init.context = oracle::gaussian(vocab->size(), cfg.dim, 31, 0.1);
    const auto trained = train(c0, init, cfg, {.freeze_target = false, .freeze_context = true});
    const bool frozen_ok = trained.context == init.context && !(trained.target == init.target);

    const auto m = compass_pipeline(c0, b.corpus_t1(), cfg);
    const bool shared = m.t0.context == m.base.context && m.t1.context == m.base.context;
    return {frozen_ok && shared, std::string("frozen context ") + (frozen_ok ? "bit-identical" : "CHANGED") +
                                     ", slice contexts " + (shared ? "equal base bitwise" : "DIFFER")};
}

// --- 6 ---------------------------------------------------------------------

Outcome sgns_semantics() {
    const auto b = generate(small_spec(2));
    const auto c = b.corpus_t0();
    std::string detail;
    bool ok = true;
    for (auto algo : {Algorithm::CBOW, Algorithm::SG}) {
        TrainingConfig cfg;
        cfg.algorithm = algo;
        cfg.dim = 50;
        auto vocab = std::make_shared<const Vocabulary>(build_vocabulary(c, cfg.min_count));
        const auto s = train(c, init_space(vocab, cfg), cfg);
        double within = 0.0, cross = 0.0;
        std::size_t nw = 0, nc = 0;
        for (std::size_t i = 0; i < vocab->size(); ++i) {
            const int ti = b.topic_of.at(vocab->word(i));
            if (ti < 0) continue;
            for (std::size_t j = i + 1; j < vocab->size(); ++j) {
                const int tj = b.topic_of.at(vocab->word(j));
                if (tj < 0) continue;
                const double cs = oracle::cosine(s.target.row(i), s.target.row(j));
                (ti == tj ? within : cross) += cs;
                ++(ti == tj ? nw : nc);
            }
        }
        const double gap = within / static_cast<double>(nw) - cross / static_cast<double>(nc);
        ok = ok && gap >= 0.2;
        detail += std::string(algorithm_name(algo)) + fmt(" within-cross %.3f ", gap);
    }
    return {ok, detail + "(>= 0.2)"};
}

// --- 7 ---------------------------------------------------------------------

struct EndToEnd {
    std::vector<EvalReport> reports;
    bool nested = true;

    const EvalReport& row(const std::string& id) const {
        for (const auto& r : reports)
            if (r.method_id == id) return r;
        throw std::runtime_error("no report row for " + id);
    }
};

EndToEnd run_bundle(std::uint64_t seed, const std::vector<std::string>& methods) {
    oracle::TempDir dir("accept");
    DriftSpec spec;
    spec.seed = seed;
    spec.shift_pairs = default_shift_pairs(spec, 6);
    const auto bundle = generate(spec);
    write_bundle(dir.path(), bundle, emit_testset(bundle, 12, 6, seed));

    RunConfig config;
    config.corpus_t0 = dir / "t0.txt";
    config.corpus_t1 = dir / "t1.txt";
    config.stopwords = dir / "stopwords.txt";
    config.testset = dir / "testset.txt";
    config.gold = dir / "gold.tsv";
    config.workdir = dir / "work";
    config.training.seed = seed;
    config.methods = methods;
    std::ostringstream log;
    cmd_train(config, log);
    cmd_score(config, log);
    cmd_classify(config, log);

    EndToEnd out;
    out.reports = cmd_evaluate(config, log);
    const WorkLayout layout{config.workdir};
    for (const auto& m : methods) {
        const auto mean = read_labels(layout.label_file(m, Rule::Mean));
        const auto strict = read_labels(layout.label_file(m, Rule::MeanMinus2Sigma));
        for (const auto& [w, l] : strict)
            if (l == 1 && mean.at(w) != 1) out.nested = false;
    }
    return out;
}

void end_to_end() {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<std::string> all = {"TWEC_CBOW",   "OP_SW_CBOW",   "OP_CW_CBOW",  "LR_SW_CBOW",
                                          "LR_CW_CBOW",  "FFNN_SW_CBOW", "FFNN_CW_CBOW"};
    std::vector<EndToEnd> runs;
    std::string per_seed;
    double rp50_sum = 0.0;
    bool nested = true;
    std::optional<std::string> error;
    try {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            runs.push_back(run_bundle(seed, seed == 1 ? all : std::vector<std::string>{"TWEC_CBOW"}));
            const double r = runs.back().row("TWEC_CBOW").r_p50;
            rp50_sum += r;
            nested = nested && runs.back().nested;
            per_seed += fmt(" %.3f", r);
        }
    } catch (const std::exception& e) {
        error = e.what();
    }
    const double secs = elapsed_since(start);

    report("7a", "TWEC_CBOW accuracy under MEAN", [&]() -> Outcome {
        if (error) return {false, "pipeline failed: " + *error};
        const double acc = runs[0].row("TWEC_CBOW").acc_mean;
        return {acc >= 0.8, fmt("acc_mean %.3f (>= 0.80, seed 1)", acc)};
    });
    report("7b", "CS_avg^SW of OP_SW exceeds OP_CW", [&]() -> Outcome {
        if (error) return {false, "pipeline failed: " + *error};
        const double sw = runs[0].row("OP_SW_CBOW").cs_avg_sw, cw = runs[0].row("OP_CW_CBOW").cs_avg_sw;
        return {sw - cw >= 0.05, fmt("OP_SW %.3f, ", sw) + fmt("OP_CW %.3f, ", cw) + fmt("margin %.3f (>= 0.05)", sw - cw)};
    });
    report("7c", "TWEC_CBOW R_p50 over 5 seeds", [&]() -> Outcome {
        if (error) return {false, "pipeline failed: " + *error};
        const double avg = rp50_sum / 5.0;
        return {avg >= 0.8, "per seed" + per_seed + fmt(", mean %.3f (>= 0.8)", avg)};
    });
    report("7d", "MEAN_MINUS_2SIGMA labels within MEAN labels", [&]() -> Outcome {
        if (error) return {false, "pipeline failed: " + *error};
        return {nested, nested ? "nested for every method and seed" : "violated"};
    });
    report("7", "end-to-end runtime", [&]() -> Outcome {
        return {secs < 600.0, fmt("%.0fs (< 600s single-threaded)", secs)};
    });
}

// --- 8 ---------------------------------------------------------------------

Outcome metric_suite() {
    std::vector<std::string> failed;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) failed.push_back(what);
    };
    auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };

    auto ranked_with = [](std::size_t n, const std::set<std::size_t>& shifted) {
        std::pair<std::vector<RankedWord>, GoldLabels> out;
        for (std::size_t r = 1; r <= n; ++r) {
            const auto w = "w" + std::to_string(100 + r);
            out.first.push_back({w, static_cast<double>(r), r});
            out.second.labels[w] = shifted.count(r) ? 1 : 0;
        }
        return out;
    };

    auto [best, gbest] = ranked_with(18, {1, 2, 3, 4, 5, 6});
    expect(near(mu_rank(best, gbest), 0.19444, 5e-6), "mu_rank floor 0.19444");
    auto [worst, gworst] = ranked_with(18, {13, 14, 15, 16, 17, 18});
    expect(near(mu_rank(worst, gworst), 0.86111, 5e-6), "mu_rank ceiling 0.86111");
    auto [two, gtwo] = ranked_with(2, {1});
    expect(mu_rank(two, gtwo) == 0.5, "mu_rank 1 of 2");

    std::map<std::string, int> pred = gbest.labels;
    for (int i = 1; i <= 3; ++i) pred["w" + std::to_string(100 + i)] = 0;
    expect(near(accuracy(pred, gbest), 15.0 / 18.0, 1e-12), "accuracy 15/18");
    expect(accuracy(gbest.labels, gbest) == 1.0, "accuracy pred = gold");

    auto [half, ghalf] = ranked_with(18, {1, 3, 5, 7, 8, 9});
    expect(recall_at_fraction(half, ghalf, 0.5) == 1.0, "R_p50 1.0");
    auto [three, gthree] = ranked_with(18, {1, 4, 9, 10, 12, 18});
    expect(recall_at_fraction(three, gthree, 0.5) == 0.5, "R_p50 0.5");
    auto [none, gnone] = ranked_with(18, {10, 11, 12, 13, 14, 15});
    expect(recall_at_fraction(none, gnone, 0.5) == 0.0, "R_p50 0.0");
    auto [four, gfour] = ranked_with(18, {1, 2, 4, 6, 11, 15});
    expect(near(recall_at_k(four, gfour, 6), 4.0 / 6.0, 1e-12), "R_down6 0.667");
    expect(recall_at_k(four, gfour, 18) == 1.0, "R_downN 1.0");

    ChangeScoreTable anchors;
    anchors.scores = {{"il", 0.9}, {"la", 0.7}};
    expect(near(avg_anchor_cosine(anchors, {"il", "la"}), 0.8, 1e-12), "CS_avg 0.8");
    expect(select_models({{"A", 0.9}, {"B", 0.7}, {"C", 0.8}}, 2) == std::vector<std::string>{"A", "C"},
           "select_models");

    const std::vector<double> u{1, 2, 3}, v{4, 5, 6};
    expect(near(cosine(u, v), 0.974632, 5e-7), "cosine 0.974632");
    ChangeScoreTable t;
    t.scores = {{"a", 0.9}, {"b", 0.9}, {"c", 0.9}, {"d", 0.1}};
    const auto st = threshold_stats(t, Rule::MeanMinus2Sigma);
    expect(near(st.mean, 0.7, 1e-12) && near(st.std, 0.34641, 5e-6) && near(st.cutoff, 0.00718, 5e-6),
           "threshold stats");
    ChangeScoreTable c3;
    c3.scores = {{"a", 0.9}, {"b", 0.2}, {"c", 0.7}};
    const std::vector<std::string> abc{"a", "b", "c"};
    const auto l = classify(c3, threshold_stats(c3, Rule::Mean), abc);
    expect(l.label_of("a") == 0 && l.label_of("b") == 1 && l.label_of("c") == 0, "classify MEAN");
    ChangeScoreTable r3;
    r3.scores = {{"a", 0.9}, {"b", 0.1}, {"c", 0.5}};
    const auto r = rank_ascending(r3, abc);
    expect(r[0].word == "b" && r[1].word == "c" && r[2].word == "a", "rank_ascending");
    ChangeScoreTable h;
    h.scores = {{"a", 1.0}, {"b", 1.0}};
    const auto bins = histogram(h, {"a", "b"}, 2);
    expect(bins[0].count == 0 && bins[1].count == 2, "histogram");

    std::string detail = failed.empty() ? "all metric and detector examples hold" : "failed:";
    for (const auto& f : failed) detail += " [" + f + "]";
    return {failed.empty(), detail};
}

// --- 9 ---------------------------------------------------------------------

Outcome determinism() {
    oracle::TempDir dir("determinism");
    auto spec = small_spec(4);
    spec.shift_pairs = default_shift_pairs(spec, 3);
    const auto b = generate(spec);
    write_bundle(dir.path(), b, emit_testset(b, 6, 3, 1));
    auto run = [&](const std::string& work) {
        RunConfig config;
        config.corpus_t0 = dir / "t0.txt";
        config.corpus_t1 = dir / "t1.txt";
        config.stopwords = dir / "stopwords.txt";
        config.testset = dir / "testset.txt";
        config.workdir = dir / work;
        config.training.dim = 30;
        config.training.threads = 1;
        config.methods = {"TWEC_CBOW", "OP_SW_SG", "LR_CW_CBOW"};
        std::ostringstream log;
        cmd_train(config, log);
        cmd_score(config, log);
        cmd_classify(config, log);
        std::vector<std::pair<std::string, std::string>> files;
        for (const auto& e : fs::recursive_directory_iterator(config.workdir)) {
            const auto ext = e.path().extension();
            if (ext == ".vec" || ext == ".tsv")
                files.emplace_back(fs::relative(e.path(), config.workdir).string(), oracle::slurp(e.path()));
        }
        std::sort(files.begin(), files.end());
        return files;
    };
    const auto a = run("w1"), c = run("w2");
    return {!a.empty() && a == c, std::to_string(a.size()) + " .vec/score/label files compared, " +
                                      (a == c ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
    report("1", "Procrustes recovery", procrustes_recovery);
    report("2", "SVD correctness", svd_correctness);
    report("3", "linear-map recovery", linear_recovery);
    report("4", "gradient checks", gradient_checks);
    report("5", "freeze contract", freeze_contract);
    report("6", "SGNS semantics", sgns_semantics);
    end_to_end();
    report("8", "metric unit suite", metric_suite);
    report("9", "determinism", determinism);
    std::printf("%s: %d criterion line(s) failed\n", failures ? "FAILED" : "ALL PASSED", failures);
    return failures ? 1 : 0;
}
