#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semshift/corpus.hpp"
#include "semshift/embedder.hpp"
#include "semshift/matrix.hpp"

namespace semshift {

/// Thin SVD A = U·diag(s)·Vᵀ with k = min(m, n).
struct SvdResult {
    Matrix u;                            // m×k, orthonormal columns
    std::vector<double> singular_values; // k, nonincreasing
    Matrix v;                            // n×k, orthonormal columns
    int sweeps = 0;
};

/// One-sided Jacobi SVD with cyclic sweeps.
///
/// Stops once every pair of working columns is orthogonal to a relative 1e-12,
/// or after 60 sweeps. Columns belonging to zero singular values are completed
/// to an orthonormal basis. Throws InvalidArgument on empty or non-finite input.
SvdResult svd(const Matrix& a);

/// Rotation aligning the slice-1 space onto the slice-0 space.
struct OrthogonalMap {
    Matrix rotation;
    std::string anchor_set;
    Slice source_slice = Slice::T1;
    Slice target_slice = Slice::T0;

    std::size_t dim() const { return rotation.rows(); }
};

/// Orthogonal Q minimizing ‖w1·Q − w0‖_F; rows pair up by anchor word.
///
/// Rows of both inputs are length-normalized first unless `normalize` is false.
/// Throws InvalidArgument for fewer than two anchors or mismatched shapes and
/// NumericalError when the cross-covariance is identically zero.
OrthogonalMap solve_orthogonal(const Matrix& w1_anchor, const Matrix& w0_anchor,
                               std::string anchor_set = "SW", bool normalize = true);

/// Rotates the target matrix of `space`; the context matrix and vocabulary are untouched.
EmbeddingSpace apply_map(EmbeddingSpace space, const OrthogonalMap& map);

void save_map(const std::filesystem::path& path, const OrthogonalMap& map);
OrthogonalMap load_map(const std::filesystem::path& path);

}  // namespace semshift
