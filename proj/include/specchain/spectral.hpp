#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "specchain/errors.hpp"
#include "specchain/graph.hpp"
#include "specchain/rng.hpp"

namespace specchain {

struct SolverOptions {
    /// Required bound on ||L x - lambda x|| for every returned unit vector.
    double tol = 1e-8;
    /// Graphs with at most this many vertices use a full dense
    /// eigendecomposition; larger ones use subspace inverse iteration.
    std::size_t dense_limit = 128;
    /// Iteration budget of the iterative path; 0 means 10 * n.
    std::size_t max_iterations = 0;
};

/// Weighted graph Laplacian L = D - A, stored sparse.
class LaplacianView {
public:
    explicit LaplacianView(const Graph& g) : matrix_(static_cast<Eigen::Index>(g.vertex_count()),
                                                     static_cast<Eigen::Index>(g.vertex_count())) {
        if (g.empty()) throw InvalidArgument("laplacian: empty graph");
        std::vector<Eigen::Triplet<double>> entries;
        entries.reserve(g.vertex_count() + 4 * g.edge_count());
        for (const auto& e : g.edges()) {
            const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
            entries.emplace_back(u, v, -e.weight);
            entries.emplace_back(v, u, -e.weight);
            entries.emplace_back(u, u, e.weight);
            entries.emplace_back(v, v, e.weight);
        }
        matrix_.setFromTriplets(entries.begin(), entries.end());
        matrix_.makeCompressed();
    }

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    const Eigen::SparseMatrix<double>& sparse() const noexcept { return matrix_; }
    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix_); }
    double operator()(std::size_t u, std::size_t v) const {
        return matrix_.coeff(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
    }
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix_ * x; }

    double max_diagonal() const {
        double m = 0.0;
        for (Eigen::Index i = 0; i < matrix_.rows(); ++i) m = std::max(m, matrix_.coeff(i, i));
        return m;
    }

private:
    Eigen::SparseMatrix<double> matrix_;
};

inline LaplacianView laplacian(const Graph& g) { return LaplacianView(g); }

struct FiedlerResult {
    double lambda2 = 0.0;
    /// Unit norm, sign-normalized, one entry per vertex.
    std::vector<double> vector;
    double residual = 0.0;
};

/// Vertex bipartition; either side may be empty.
struct Bipartition {
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
};

namespace detail {

/// Entries this small relative to the unit-norm vector are treated as exact
/// zeros, so cut vertices land on the nonnegative side.
inline constexpr double zero_snap = 1e-12;

/// Flips `x` so its largest-magnitude entry is positive (lowest index wins
/// near-ties) and snaps numerically-zero entries.
inline void sign_normalize(Eigen::Ref<Eigen::VectorXd> x) {
    const double peak = x.cwiseAbs().maxCoeff();
    Eigen::Index anchor = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) >= peak * (1.0 - 1e-9)) {
            anchor = i;
            break;
        }
    }
    if (x[anchor] < 0.0) x = -x;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (std::abs(x[i]) <= zero_snap) x[i] = 0.0;
}

struct Eigenpairs {
    Eigen::VectorXd values;   // ascending, constant eigenvector excluded
    Eigen::MatrixXd vectors;  // one unit column per value
    Eigen::VectorXd residuals;
};

inline Eigen::VectorXd residual_norms(const Eigen::SparseMatrix<double>& L, const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& values) {
    const Eigen::MatrixXd R = L * X - X * values.asDiagonal();
    return R.colwise().norm().transpose();
}

inline Eigenpairs dense_eigenpairs(const LaplacianView& lap, std::size_t count) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap.dense());
    if (solver.info() != Eigen::Success)
        throw SolverError("dense eigendecomposition failed", std::numeric_limits<double>::infinity());
    const auto c = static_cast<Eigen::Index>(count);
    Eigenpairs out;
    out.values = solver.eigenvalues().segment(1, c);
    out.vectors = solver.eigenvectors().middleCols(1, c);
    out.residuals = residual_norms(lap.sparse(), out.vectors, out.values);
    return out;
}

/// Subspace inverse iteration on the complement of the all-ones vector.
/// L is pseudo-inverted by grounding the last vertex: for b orthogonal to
/// ones, the reduced system's solution padded with 0 satisfies L y = b.
inline Eigenpairs iterative_eigenpairs(const LaplacianView& lap, std::size_t count,
                                       const SolverOptions& opts) {
    const auto n = static_cast<Eigen::Index>(lap.dimension());
    const auto& L = lap.sparse();
    const Eigen::Index want = static_cast<Eigen::Index>(count);
    const Eigen::Index block =
        std::min<Eigen::Index>(n - 1, want + std::max<Eigen::Index>(4, want));

    Eigen::SparseMatrix<double> grounded = L.topLeftCorner(n - 1, n - 1);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(grounded);
    if (factor.info() != Eigen::Success)
        throw SolverError("grounded Laplacian factorization failed",
                          std::numeric_limits<double>::infinity());

    Rng rng = make_rng(0x5eedf1ed1e7ULL ^ static_cast<std::uint64_t>(n));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::MatrixXd X(n, block);
    for (Eigen::Index j = 0; j < block; ++j)
        for (Eigen::Index i = 0; i < n; ++i) X(i, j) = unit(rng);

    const std::size_t budget =
        opts.max_iterations ? opts.max_iterations : 10 * static_cast<std::size_t>(n);
    Eigenpairs out;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < budget; ++it) {
        X.rowwise() -= X.colwise().mean();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
        X = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
        // Re-project: QR mixes in rounding along the ones direction.
        X.rowwise() -= X.colwise().mean();

        const Eigen::MatrixXd LX = L * X;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(X.transpose() * LX);
        X = X * ritz.eigenvectors();
        out.values = ritz.eigenvalues().head(want);
        out.vectors = X.leftCols(want);
        out.residuals = residual_norms(L, out.vectors, out.values);
        worst = out.residuals.maxCoeff();
        if (worst <= opts.tol) return out;

        Eigen::MatrixXd next(n, block);
        for (Eigen::Index j = 0; j < block; ++j) {
            next.col(j).head(n - 1) = factor.solve(X.col(j).head(n - 1));
            next(n - 1, j) = 0.0;
        }
        X = std::move(next);
    }
    throw SolverError("eigensolver did not converge: residual " + std::to_string(worst) +
                          " after " + std::to_string(budget) + " iterations",
                      worst);
}

/// The `count` eigenpairs following the constant one, sign-normalized.
inline Eigenpairs smallest_nontrivial(const Graph& g, std::size_t count, const SolverOptions& opts) {
    const std::size_t n = g.vertex_count();
    if (n < 2) throw PreconditionError("spectral routines need at least two vertices");
    if (!is_connected(g))
        throw PreconditionError("spectral routines need a connected graph (lambda2 would be 0)");
    if (count == 0 || count > n - 1) throw InvalidArgument("invalid eigenpair count");
    LaplacianView lap(g);
    Eigenpairs pairs = n <= opts.dense_limit ? dense_eigenpairs(lap, count)
                                             : iterative_eigenpairs(lap, count, opts);
    for (Eigen::Index j = 0; j < pairs.vectors.cols(); ++j) sign_normalize(pairs.vectors.col(j));
    pairs.residuals = residual_norms(lap.sparse(), pairs.vectors, pairs.values);
    const double worst = pairs.residuals.maxCoeff();
    if (!(worst <= opts.tol))
        throw SolverError("eigenpair residual " + std::to_string(worst) + " exceeds tolerance",
                          worst);
    return pairs;
}

}  // namespace detail

/// Fiedler pair of the Laplacian of a connected graph with n >= 2.
inline FiedlerResult fiedler(const Graph& g, const SolverOptions& opts = {}) {
    auto pairs = detail::smallest_nontrivial(g, 1, opts);
    FiedlerResult out;
    out.lambda2 = std::max(0.0, pairs.values[0]);
    out.vector.assign(pairs.vectors.col(0).data(), pairs.vectors.col(0).data() + pairs.vectors.rows());
    out.residual = pairs.residuals[0];
    return out;
}

/// ({v : f[v] >= t}, {v : f[v] < t}).
inline Bipartition threshold_split(const Graph& g, const FiedlerResult& f, double t) {
    if (f.vector.size() != g.vertex_count())
        throw InvalidArgument("threshold_split: Fiedler vector size does not match graph");
    Bipartition out;
    for (std::size_t v = 0; v < f.vector.size(); ++v)
        (f.vector[v] >= t ? out.first : out.second).push_back(v);
    return out;
}

/// ({v : f[v] >= 0}, {v : f[v] < 0}).
inline Bipartition sign_split(const Graph& g, const FiedlerResult& f) {
    return threshold_split(g, f, 0.0);
}

/// Rows of the eigenvectors u2..uk of the Laplacian.
struct SpectralEmbedding {
    std::size_t dimension = 0;
    Eigen::MatrixXd coordinates;  // n x dimension
    Eigen::VectorXd eigenvalues;
};

inline SpectralEmbedding spectral_embedding(const Graph& g, std::size_t k,
                                            const SolverOptions& opts = {}) {
    if (k < 2 || k > g.vertex_count())
        throw InvalidArgument("spectral_embedding: need 2 <= k <= n");
    auto pairs = detail::smallest_nontrivial(g, k - 1, opts);
    return {k - 1, std::move(pairs.vectors), std::move(pairs.values)};
}

}  // namespace specchain
