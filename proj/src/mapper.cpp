#include "semshift/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "semshift/error.hpp"
#include "semshift/rng.hpp"

namespace semshift {

namespace {

void check_pair(const Matrix& x, const Matrix& y, const char* who) {
    if (x.rows() == 0) throw InvalidArgument(std::string(who) + ": no training rows");
    if (x.rows() != y.rows()) throw InvalidArgument(std::string(who) + ": x and y row counts differ");
    if (!x.all_finite() || !y.all_finite()) throw InvalidArgument(std::string(who) + ": non-finite input");
}

// In-place Cholesky of a symmetric positive definite matrix; returns the smallest pivot².
double cholesky(Matrix& a) {
    const std::size_t n = a.rows();
    double min_pivot = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0)) throw NumericalError("normal equations are not positive definite");
        min_pivot = std::min(min_pivot, d);
        const double l = std::sqrt(d);
        a(j, j) = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / l;
        }
        for (std::size_t i = 0; i < j; ++i) a(i, j) = 0.0;
    }
    return min_pivot;
}

// Solves L·Lᵀ·X = B column by column.
Matrix cholesky_solve(const Matrix& l, Matrix b) {
    const std::size_t n = l.rows();
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = b(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b(k, c);
            b(i, c) = s / l(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = b(i, c);
            for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * b(k, c);
            b(i, c) = s / l(i, i);
        }
    }
    return b;
}

}  // namespace

LinearMap fit_linear(const Matrix& x, const Matrix& y, bool use_bias, double damping) {
    check_pair(x, y, "fit_linear");
    const std::size_t d = x.cols();
    const std::size_t p = d + (use_bias ? 1 : 0);
    Matrix xa(x.rows(), p, 1.0);
    for (std::size_t i = 0; i < x.rows(); ++i) std::copy(x.row(i).begin(), x.row(i).end(), xa.row(i).begin());

    Matrix gram = multiply_at_b(xa, xa);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        max_diag = std::max(max_diag, gram(i, i));
        gram(i, i) += damping;
    }
    const double min_pivot = cholesky(gram);
    const Matrix coef = cholesky_solve(gram, multiply_at_b(xa, y));

    LinearMap map;
    map.use_bias = use_bias;
    map.weights = Matrix(d, y.cols());
    for (std::size_t i = 0; i < d; ++i) std::copy(coef.row(i).begin(), coef.row(i).end(), map.weights.row(i).begin());
    map.bias.assign(y.cols(), 0.0);
    if (use_bias) std::copy(coef.row(d).begin(), coef.row(d).end(), map.bias.begin());
    map.rank_deficient = x.rows() < p || min_pivot <= 1e-10 * std::max(max_diag, 1.0);
    map.trained = true;
    return map;
}

Matrix predict(const LinearMap& map, const Matrix& x) {
    if (!map.trained) throw ContractViolation("predict: linear map was never fitted");
    if (x.cols() != map.weights.rows()) throw InvalidArgument("predict: input width does not match the map");
    Matrix out = multiply(x, map.weights);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += map.bias[j];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feed-forward network

namespace {

struct Forward {
    std::vector<Matrix> activations;  // activations[0] = input, back() = output
};

Forward forward(const NeuralMap& map, const Matrix& x) {
    Forward f;
    f.activations.push_back(x);
    for (std::size_t l = 0; l < map.layers.size(); ++l) {
        const auto& layer = map.layers[l];
        Matrix z = multiply(f.activations.back(), layer.weights);
        const bool hidden = l + 1 < map.layers.size();
        for (std::size_t i = 0; i < z.rows(); ++i) {
            auto r = z.row(i);
            for (std::size_t j = 0; j < r.size(); ++j) {
                r[j] += layer.bias[j];
                if (hidden) r[j] = std::tanh(r[j]);
            }
        }
        f.activations.push_back(std::move(z));
    }
    return f;
}

double batch_loss(const Matrix& out, const Matrix& y) {
    double s = 0.0;
    auto o = out.data();
    auto t = y.data();
    for (std::size_t i = 0; i < o.size(); ++i) s += (o[i] - t[i]) * (o[i] - t[i]);
    return 0.5 * s / static_cast<double>(y.rows());
}

void check_widths(const NeuralMap& map, const Matrix& x) {
    if (map.layers.empty()) throw ContractViolation("neural map has no layers");
    if (x.cols() != map.layers.front().weights.rows())
        throw InvalidArgument("predict: input width does not match the map");
}

}  // namespace

Matrix predict(const NeuralMap& map, const Matrix& x) {
    check_widths(map, x);
    return std::move(forward(map, x).activations.back());
}

double ffnn_loss(const NeuralMap& map, const Matrix& x, const Matrix& y) {
    check_widths(map, x);
    return batch_loss(forward(map, x).activations.back(), y);
}

FfnnGradients ffnn_gradients(const NeuralMap& map, const Matrix& x, const Matrix& y) {
    check_widths(map, x);
    const Forward f = forward(map, x);
    FfnnGradients g;
    g.loss = batch_loss(f.activations.back(), y);
    g.layers.resize(map.layers.size());

    const double inv_n = 1.0 / static_cast<double>(x.rows());
    Matrix delta = subtract(f.activations.back(), y);  // ∂L/∂z of the output layer, up to 1/n
    for (double& v : delta.data()) v *= inv_n;
    for (std::size_t l = map.layers.size(); l-- > 0;) {
        const Matrix& input = f.activations[l];
        g.layers[l].weights = multiply_at_b(input, delta);
        g.layers[l].bias.assign(delta.cols(), 0.0);
        for (std::size_t i = 0; i < delta.rows(); ++i)
            for (std::size_t j = 0; j < delta.cols(); ++j) g.layers[l].bias[j] += delta(i, j);
        if (l == 0) break;
        Matrix back = multiply_a_bt(delta, map.layers[l].weights);
        // input = tanh(z), so ∂tanh/∂z = 1 − input².
        for (std::size_t i = 0; i < back.rows(); ++i)
            for (std::size_t j = 0; j < back.cols(); ++j) back(i, j) *= 1.0 - input(i, j) * input(i, j);
        delta = std::move(back);
    }
    return g;
}

NeuralMap fit_ffnn(const Matrix& x, const Matrix& y, const FfnnConfig& config) {
    check_pair(x, y, "fit_ffnn");
    if (config.batch_size == 0) throw InvalidArgument("fit_ffnn: batch size must be positive");
    if (!(config.learning_rate > 0.0)) throw InvalidArgument("fit_ffnn: learning rate must be positive");

    NeuralMap map;
    map.train_config = config;
    const std::size_t hidden = config.hidden == 0 ? x.cols() : config.hidden;
    Rng rng(config.seed);
    auto make_layer = [&](std::size_t in, std::size_t out) {
        NeuralMap::Layer layer;
        layer.weights = Matrix(in, out);
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
        layer.bias.assign(out, 0.0);
        return layer;
    };
    map.layers.push_back(make_layer(x.cols(), hidden));
    map.layers.push_back(make_layer(hidden, y.cols()));
    map.initial_loss = ffnn_loss(map, x, y);
    map.final_loss = map.initial_loss;

    std::vector<std::size_t> order(x.rows());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            std::span<const std::size_t> idx(order.data() + start, stop - start);
            const auto g = ffnn_gradients(map, gather_rows(x, idx), gather_rows(y, idx));
            if (!std::isfinite(g.loss))
                throw NumericalError("fit_ffnn: loss diverged in epoch " + std::to_string(epoch + 1));
            for (std::size_t l = 0; l < map.layers.size(); ++l) {
                auto w = map.layers[l].weights.data();
                auto gw = g.layers[l].weights.data();
                for (std::size_t k = 0; k < w.size(); ++k) w[k] -= config.learning_rate * gw[k];
                for (std::size_t k = 0; k < map.layers[l].bias.size(); ++k)
                    map.layers[l].bias[k] -= config.learning_rate * g.layers[l].bias[k];
            }
        }
        map.final_loss = ffnn_loss(map, x, y);
        if (!std::isfinite(map.final_loss))
            throw NumericalError("fit_ffnn: loss diverged in epoch " + std::to_string(epoch + 1));
    }
    return map;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

void write_rows(std::ostream& out, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
        out << '\n';
    }
}

void write_vector(std::ostream& out, const std::vector<double>& v) {
    for (std::size_t j = 0; j < v.size(); ++j) out << (j ? " " : "") << v[j];
    out << '\n';
}

void read_into(std::istream& in, std::span<double> dst, const std::filesystem::path& path) {
    for (double& v : dst)
        if (!(in >> v)) throw IoError("truncated map file " + path.string());
}

}  // namespace

void save_linear_map(const std::filesystem::path& path, const LinearMap& map) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    out << "linear " << map.weights.rows() << ' ' << map.weights.cols() << ' ' << (map.use_bias ? 1 : 0)
        << ' ' << (map.anchor_set.empty() ? "-" : map.anchor_set) << '\n';
    write_rows(out, map.weights);
    write_vector(out, map.bias);
    if (!out) throw IoError("write error on " + path.string());
}

LinearMap load_linear_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string tag;
    std::size_t rows = 0, cols = 0;
    int bias = 0;
    LinearMap map;
    if (!(in >> tag >> rows >> cols >> bias >> map.anchor_set) || tag != "linear")
        throw IoError("malformed linear map header in " + path.string());
    map.weights = Matrix(rows, cols);
    map.bias.assign(cols, 0.0);
    read_into(in, map.weights.data(), path);
    read_into(in, map.bias, path);
    map.use_bias = bias != 0;
    map.trained = true;
    return map;
}

void save_neural_map(const std::filesystem::path& path, const NeuralMap& map) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    out << "ffnn " << map.layers.size() << ' ' << map.activation << ' '
        << (map.anchor_set.empty() ? "-" : map.anchor_set) << '\n';
    for (const auto& layer : map.layers) {
        out << "layer " << layer.weights.rows() << ' ' << layer.weights.cols() << '\n';
        write_rows(out, layer.weights);
        write_vector(out, layer.bias);
    }
    if (!out) throw IoError("write error on " + path.string());
}

NeuralMap load_neural_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string tag;
    std::size_t n_layers = 0;
    NeuralMap map;
    if (!(in >> tag >> n_layers >> map.activation >> map.anchor_set) || tag != "ffnn")
        throw IoError("malformed neural map header in " + path.string());
    for (std::size_t l = 0; l < n_layers; ++l) {
        std::size_t rows = 0, cols = 0;
        if (!(in >> tag >> rows >> cols) || tag != "layer") throw IoError("malformed layer header in " + path.string());
        NeuralMap::Layer layer;
        layer.weights = Matrix(rows, cols);
        layer.bias.assign(cols, 0.0);
        read_into(in, layer.weights.data(), path);
        read_into(in, layer.bias, path);
        if (!map.layers.empty() && map.layers.back().weights.cols() != rows)
            throw IoError("layer widths do not chain in " + path.string());
        map.layers.push_back(std::move(layer));
    }
    return map;
}

}  // namespace semshift
