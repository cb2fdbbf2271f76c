#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semshift/matrix.hpp"

namespace semshift {

/// Affine map y ≈ x·M + b fitted by least squares.
struct LinearMap {
    Matrix weights;
    std::vector<double> bias;
    std::string anchor_set;
    bool use_bias = true;
    /// Set when the normal equations were (numerically) singular; the damping then
    /// selects the minimum-norm solution.
    bool rank_deficient = false;
    bool trained = false;
};

/// Least squares over the bias-augmented normal equations with Tikhonov damping `damping`.
LinearMap fit_linear(const Matrix& x, const Matrix& y, bool use_bias = true, double damping = 1e-8);

struct FfnnConfig {
    std::size_t hidden = 0;  // 0 means "same as the input width"
    std::size_t epochs = 200;
    double learning_rate = 0.01;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
};

/// Multi-layer perceptron: tanh hidden layers, linear output.
struct NeuralMap {
    struct Layer {
        Matrix weights;  // in × out
        std::vector<double> bias;
    };
    std::vector<Layer> layers;
    std::string activation = "tanh";
    FfnnConfig train_config;
    std::string anchor_set;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

/// Trains a one-hidden-layer network by mini-batch SGD on ½‖ŷ − y‖² averaged over rows.
/// Throws NumericalError naming the epoch if the loss stops being finite.
NeuralMap fit_ffnn(const Matrix& x, const Matrix& y, const FfnnConfig& config = {});

/// Loss and its gradients for the batch (x, y); gradients are laid out like `map.layers`.
struct FfnnGradients {
    double loss = 0.0;
    std::vector<NeuralMap::Layer> layers;
};
FfnnGradients ffnn_gradients(const NeuralMap& map, const Matrix& x, const Matrix& y);
double ffnn_loss(const NeuralMap& map, const Matrix& x, const Matrix& y);

Matrix predict(const LinearMap& map, const Matrix& x);
Matrix predict(const NeuralMap& map, const Matrix& x);

void save_linear_map(const std::filesystem::path& path, const LinearMap& map);
LinearMap load_linear_map(const std::filesystem::path& path);
void save_neural_map(const std::filesystem::path& path, const NeuralMap& map);
NeuralMap load_neural_map(const std::filesystem::path& path);

}  // namespace semshift
