#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "semshift/detector.hpp"
#include "semshift/evaluator.hpp"
#include "semshift/mapper.hpp"
#include "semshift/pipeline.hpp"
#include "semshift/procrustes.hpp"
#include "semshift/synthgen.hpp"

namespace py = pybind11;
using namespace semshift;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
}

Array to_array(const Matrix& m) {
    Array a({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), a.mutable_data());
    return a;
}

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw InvalidArgument("expected a 1-D array");
    return {a.data(), a.data() + a.size()};
}

ChangeScoreTable table_of(const std::map<std::string, double>& scores) {
    ChangeScoreTable t;
    t.scores = scores;
    return t;
}

GoldLabels gold_of(const std::map<std::string, int>& labels) {
    GoldLabels g;
    g.labels = labels;
    return g;
}

// Ranks the gold words by ascending score.
std::vector<RankedWord> ranked(const std::map<std::string, double>& scores, const GoldLabels& gold) {
    const auto words = gold.words();
    return rank_ascending(table_of(scores), words);
}

py::dict report_dict(const EvalReport& r) {
    py::dict d;
    d["method_id"] = r.method_id;
    d["cs_avg_sw"] = r.cs_avg_sw;
    d["acc_mean"] = r.acc_mean;
    d["acc_2sigma"] = r.acc_2sigma;
    d["mu_rank"] = r.mu_rank;
    d["r_p50"] = r.r_p50;
    d["r_down_k"] = r.r_down_k;
    return d;
}

// Runs a pipeline stage and returns its log text.
template <typename F>
std::string logged(F&& f) {
    std::ostringstream log;
    {
        py::gil_scoped_release release;
        f(log);
    }
    return log.str();
}

}  // namespace

PYBIND11_MODULE(_semshift, m) {
    m.doc() = "Lexical semantic change detection between two corpus slices";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", error.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
    py::register_exception<ContractViolation>(m, "ContractViolation", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

    m.def("tokenize", [](const std::string& line) { return tokenize_line(line); }, py::arg("line"));

    m.def(
        "svd",
        [](const Array& a) {
            const auto r = svd(to_matrix(a));
            return py::make_tuple(to_array(r.u), r.singular_values, to_array(r.v));
        },
        py::arg("a"), "Thin SVD (U, singular values, V) with A = U diag(s) Vᵀ.");

    m.def(
        "solve_orthogonal",
        [](const Array& w1, const Array& w0, bool normalize) {
            return to_array(solve_orthogonal(to_matrix(w1), to_matrix(w0), "SW", normalize).rotation);
        },
        py::arg("w1"), py::arg("w0"), py::arg("normalize") = true,
        "Orthogonal Q minimizing ||w1 Q - w0||_F.");

    m.def(
        "fit_linear",
        [](const Array& x, const Array& y, bool use_bias) {
            const auto map = fit_linear(to_matrix(x), to_matrix(y), use_bias);
            return py::make_tuple(to_array(map.weights), map.bias, map.rank_deficient);
        },
        py::arg("x"), py::arg("y"), py::arg("use_bias") = true,
        "Least-squares affine map y ~ x M + b; returns (M, b, rank_deficient).");

    py::class_<NeuralMap>(m, "NeuralMap")
        .def("predict", [](const NeuralMap& n, const Array& x) { return to_array(predict(n, to_matrix(x))); })
        .def_readonly("initial_loss", &NeuralMap::initial_loss)
        .def_readonly("final_loss", &NeuralMap::final_loss);

    m.def(
        "fit_ffnn",
        [](const Array& x, const Array& y, std::size_t hidden, std::size_t epochs, double learning_rate,
           std::size_t batch_size, std::uint64_t seed) {
            FfnnConfig cfg{hidden, epochs, learning_rate, batch_size, seed};
            return fit_ffnn(to_matrix(x), to_matrix(y), cfg);
        },
        py::arg("x"), py::arg("y"), py::arg("hidden") = 0, py::arg("epochs") = 200, py::arg("learning_rate") = 0.01,
        py::arg("batch_size") = 32, py::arg("seed") = 1);

    m.def(
        "cosine", [](const Array& u, const Array& v) { return cosine(to_vector(u), to_vector(v)); }, py::arg("u"),
        py::arg("v"));

    m.def(
        "threshold",
        [](const std::map<std::string, double>& scores, const std::string& rule) {
            const auto st = threshold_stats(table_of(scores), parse_rule(rule));
            return py::make_tuple(st.mean, st.std, st.cutoff);
        },
        py::arg("scores"), py::arg("rule") = "MEAN", "Population (mean, std, cutoff) of a score table.");

    m.def(
        "classify",
        [](const std::map<std::string, double>& scores, const std::vector<std::string>& test_words,
           const std::string& rule) {
            const auto table = table_of(scores);
            const auto labels = classify(table, threshold_stats(table, parse_rule(rule)), test_words);
            std::map<std::string, int> out;
            for (const auto& w : test_words) out[w] = labels.label_of(w);
            return out;
        },
        py::arg("scores"), py::arg("test_words"), py::arg("rule") = "MEAN");

    m.def(
        "accuracy",
        [](const std::map<std::string, int>& predicted, const std::map<std::string, int>& gold) {
            return accuracy(predicted, gold_of(gold));
        },
        py::arg("predicted"), py::arg("gold"));
    m.def(
        "mu_rank",
        [](const std::map<std::string, double>& scores, const std::map<std::string, int>& gold) {
            const auto g = gold_of(gold);
            return mu_rank(ranked(scores, g), g);
        },
        py::arg("scores"), py::arg("gold"));
    m.def(
        "recall_at_fraction",
        [](const std::map<std::string, double>& scores, const std::map<std::string, int>& gold, double p) {
            const auto g = gold_of(gold);
            return recall_at_fraction(ranked(scores, g), g, p);
        },
        py::arg("scores"), py::arg("gold"), py::arg("p") = 0.5);
    m.def(
        "recall_at_k",
        [](const std::map<std::string, double>& scores, const std::map<std::string, int>& gold, std::size_t k) {
            const auto g = gold_of(gold);
            return recall_at_k(ranked(scores, g), g, k == 0 ? default_recall_k(g.size()) : k);
        },
        py::arg("scores"), py::arg("gold"), py::arg("k") = 0);

    m.def(
        "synth",
        [](const std::filesystem::path& out, std::size_t vocab_size, std::size_t topics, std::size_t sentences,
           std::size_t pairs, std::uint64_t seed) {
            DriftSpec spec;
            spec.vocab_size = vocab_size;
            spec.topics = topics;
            spec.sentences_per_slice = sentences;
            spec.seed = seed;
            spec.shift_pairs = default_shift_pairs(spec, pairs);
            const auto bundle = generate(spec);
            const auto files = write_bundle(out, bundle, emit_testset(bundle, 12, pairs, seed));
            py::dict d;
            d["corpus_t0"] = files.corpus_t0;
            d["corpus_t1"] = files.corpus_t1;
            d["stopwords"] = files.stopwords;
            d["gold"] = files.gold;
            d["testset"] = files.testset;
            return d;
        },
        py::arg("out"), py::arg("vocab_size") = 2000, py::arg("topics") = 10, py::arg("sentences") = 60000,
        py::arg("pairs") = 6, py::arg("seed") = 1, "Writes a synthetic two-slice bundle and returns its paths.");

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def("set", &RunConfig::set, py::arg("key"), py::arg("value"))
        .def("load_file", &RunConfig::load_file, py::arg("path"))
        .def("hash", &RunConfig::hash)
        .def_readwrite("corpus_t0", &RunConfig::corpus_t0)
        .def_readwrite("corpus_t1", &RunConfig::corpus_t1)
        .def_readwrite("stopwords", &RunConfig::stopwords)
        .def_readwrite("testset", &RunConfig::testset)
        .def_readwrite("gold", &RunConfig::gold)
        .def_readwrite("workdir", &RunConfig::workdir)
        .def_readwrite("methods", &RunConfig::methods);

    m.def("train", [](const RunConfig& c) { return logged([&](std::ostream& o) { cmd_train(c, o); }); });
    m.def("score", [](const RunConfig& c) { return logged([&](std::ostream& o) { cmd_score(c, o); }); });
    m.def("classify_run", [](const RunConfig& c) { return logged([&](std::ostream& o) { cmd_classify(c, o); }); });
    m.def("evaluate", [](const RunConfig& c) {
        std::vector<EvalReport> reports;
        logged([&](std::ostream& o) { reports = cmd_evaluate(c, o); });
        py::list out;
        for (const auto& r : reports) out.append(report_dict(r));
        return out;
    });
}
