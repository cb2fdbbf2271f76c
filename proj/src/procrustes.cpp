#include "semshift/procrustes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "semshift/error.hpp"

namespace semshift {

namespace {

constexpr double kRotationTolerance = 1e-12;
constexpr int kMaxSweeps = 60;

void rotate(std::span<double> x, std::span<double> y, double c, double s) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        const double yi = y[i];
        x[i] = c * xi - s * yi;
        y[i] = s * xi + c * yi;
    }
}

// Unit vector of length `dim` orthogonal to the rows of `basis` listed in `used`:
// the standard basis vector with the largest residual, re-orthogonalized twice.
std::vector<double> complete_basis(const Matrix& basis, const std::vector<std::size_t>& used,
                                   std::size_t dim) {
    auto residual = [&](std::size_t e) {
        std::vector<double> v(dim, 0.0);
        v[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j : used) {
                auto b = basis.row(j);
                const double p = dot(b, v);
                for (std::size_t i = 0; i < dim; ++i) v[i] -= p * b[i];
            }
        return v;
    };
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < dim; ++e) {
        const double n = norm2(residual(e));
        if (n > best_norm) {
            best_norm = n;
            best = e;
        }
    }
    if (best_norm <= 1e-8) throw NumericalError("svd: cannot complete orthonormal basis");
    auto v = residual(best);
    for (double& x : v) x /= best_norm;
    return v;
}

// Jacobi on a matrix with at least as many rows as columns. `cols` holds Aᵀ, so each
// working column is a contiguous row.
SvdResult jacobi_tall(Matrix cols) {
    const std::size_t n = cols.rows();
    const std::size_t m = cols.cols();
    Matrix vt = Matrix::identity(n);

    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                auto up = cols.row(p);
                auto uq = cols.row(q);
                const double alpha = dot(up, up);
                const double beta = dot(uq, uq);
                const double gamma = dot(up, uq);
                if (gamma == 0.0 || std::abs(gamma) <= kRotationTolerance * std::sqrt(alpha * beta))
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate(up, uq, c, s);
                rotate(vt.row(p), vt.row(q), c, s);
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(cols.row(j));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

    const double cutoff = (n == 0 ? 0.0 : sigma[order[0]]) * static_cast<double>(std::max(m, n)) *
                          std::numeric_limits<double>::epsilon();

    SvdResult out;
    out.sweeps = sweep + 1;
    out.singular_values.resize(n);
    Matrix ut(n, m);  // row j = j-th left singular vector
    Matrix v(n, n);
    std::vector<std::size_t> good;
    std::vector<std::size_t> deficient;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        auto src = cols.row(j);
        auto dst = ut.row(k);
        if (sigma[j] > cutoff && sigma[j] > 0.0) {
            out.singular_values[k] = sigma[j];
            for (std::size_t i = 0; i < m; ++i) dst[i] = src[i] / sigma[j];
            good.push_back(k);
        } else {
            out.singular_values[k] = 0.0;
            deficient.push_back(k);
        }
        auto vrow = vt.row(j);
        for (std::size_t i = 0; i < n; ++i) v(i, k) = vrow[i];
    }
    for (std::size_t k : deficient) {
        auto e = complete_basis(ut, good, m);
        std::copy(e.begin(), e.end(), ut.row(k).begin());
        good.push_back(k);
    }
    out.u = transpose(ut);
    out.v = std::move(v);
    return out;
}

}  // namespace

SvdResult svd(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) throw InvalidArgument("svd: empty matrix");
    if (!a.all_finite()) throw InvalidArgument("svd: non-finite input");
    if (a.rows() >= a.cols()) return jacobi_tall(transpose(a));
    // A = (Aᵀ)ᵀ: decompose the tall transpose and swap the factors.
    SvdResult r = jacobi_tall(a);
    std::swap(r.u, r.v);
    return r;
}

OrthogonalMap solve_orthogonal(const Matrix& w1_anchor, const Matrix& w0_anchor,
                               std::string anchor_set, bool normalize) {
    if (w1_anchor.rows() != w0_anchor.rows() || w1_anchor.cols() != w0_anchor.cols())
        throw InvalidArgument("solve_orthogonal: anchor matrices differ in shape");
    if (w1_anchor.rows() < 2) throw InvalidArgument("solve_orthogonal: need at least two anchors");
    const Matrix x = normalize ? normalize_rows(w1_anchor) : w1_anchor;
    const Matrix y = normalize ? normalize_rows(w0_anchor) : w0_anchor;
    const Matrix cross = multiply_at_b(x, y);
    if (frobenius_norm(cross) == 0.0) throw NumericalError("solve_orthogonal: cross-covariance has rank 0");
    const SvdResult d = svd(cross);
    OrthogonalMap map;
    map.rotation = multiply_a_bt(d.u, d.v);
    map.anchor_set = std::move(anchor_set);
    return map;
}

EmbeddingSpace apply_map(EmbeddingSpace space, const OrthogonalMap& map) {
    if (space.dim() != map.dim()) throw InvalidArgument("apply_map: dimension mismatch");
    if (space.slice != map.source_slice)
        throw InvalidArgument("apply_map: space belongs to slice " + std::string(slice_name(space.slice)) +
                              " but the map aligns slice " + std::string(slice_name(map.source_slice)));
    space.target = multiply(space.target, map.rotation);
    space.aligned_by = map.anchor_set;
    return space;
}

void save_map(const std::filesystem::path& path, const OrthogonalMap& map) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    out << map.dim() << ' ' << map.anchor_set << '\n';
    for (std::size_t i = 0; i < map.dim(); ++i) {
        for (std::size_t j = 0; j < map.dim(); ++j) out << (j ? " " : "") << map.rotation(i, j);
        out << '\n';
    }
    if (!out) throw IoError("write error on " + path.string());
}

OrthogonalMap load_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    OrthogonalMap map;
    std::size_t dim = 0;
    if (!(in >> dim >> map.anchor_set) || dim == 0) throw IoError("malformed map header in " + path.string());
    map.rotation = Matrix(dim, dim);
    for (double& v : map.rotation.data())
        if (!(in >> v)) throw IoError("truncated map file " + path.string());
    return map;
}

}  // namespace semshift
