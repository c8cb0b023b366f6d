#include "grkbs/pde.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace grkbs {

DiscreteEllipticOperator::DiscreteEllipticOperator(double length, std::vector<double> diag,
                                                   std::vector<double> off,
                                                   std::vector<double> weights,
                                                   std::vector<double> grid, double min_a)
    : length_(length),
      diag_(std::move(diag)),
      off_(std::move(off)),
      weights_(std::move(weights)),
      grid_(std::move(grid)),
      min_a_(min_a) {}

DiscreteEllipticOperator assemble(const EllipticProblem& problem) {
    const std::size_t M = problem.grid_points;
    if (M < 3) throw std::invalid_argument("assemble: grid_points must be >= 3");
    if (!(problem.length > 0.0)) throw std::invalid_argument("assemble: length must be positive");
    if (!problem.k_coeff || !problem.a_coeff) {
        throw std::invalid_argument("assemble: coefficient callables required");
    }
    const double h = problem.length / static_cast<double>(M - 1);

    std::vector<double> grid(M), a(M), k_half(M - 1);
    double min_a = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < M; ++j) {
        grid[j] = static_cast<double>(j) * h;
        a[j] = problem.a_coeff(grid[j]);
        const double k_node = problem.k_coeff(grid[j]);
        if (!(k_node > 0.0)) throw std::invalid_argument("assemble: k must be positive on the grid");
        if (!(a[j] > 0.0)) throw std::invalid_argument("assemble: a must be positive on the grid");
        min_a = std::min(min_a, a[j]);
    }
    for (std::size_t j = 0; j + 1 < M; ++j) {
        k_half[j] = problem.k_coeff(grid[j] + 0.5 * h);
        if (!(k_half[j] > 0.0)) throw std::invalid_argument("assemble: k must be positive at midpoints");
    }

    const double h2 = h * h;
    std::vector<double> diag(M), off(M - 1), weights(M, h);
    weights.front() = 0.5 * h;
    weights.back() = 0.5 * h;
    for (std::size_t j = 0; j + 1 < M; ++j) off[j] = -k_half[j] / h2;
    diag[0] = k_half[0] / h2 + 0.5 * a[0];
    diag[M - 1] = k_half[M - 2] / h2 + 0.5 * a[M - 1];
    for (std::size_t j = 1; j + 1 < M; ++j) {
        diag[j] = (k_half[j - 1] + k_half[j]) / h2 + a[j];
    }

    return DiscreteEllipticOperator(problem.length, std::move(diag), std::move(off),
                                    std::move(weights), std::move(grid), min_a);
}

Eigen::MatrixXd DiscreteEllipticOperator::dense() const {
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        A(j, j) = diag_[static_cast<std::size_t>(j)];
        if (j + 1 < n) {
            A(j, j + 1) = off_[static_cast<std::size_t>(j)];
            A(j + 1, j) = off_[static_cast<std::size_t>(j)];
        }
    }
    return A;
}

Eigen::VectorXd DiscreteEllipticOperator::apply(const Eigen::VectorXd& u) const {
    const std::size_t M = size();
    if (static_cast<std::size_t>(u.size()) != M) {
        throw std::invalid_argument("apply: grid function has wrong length");
    }
    const double h = spacing();
    Eigen::VectorXd out(static_cast<Eigen::Index>(M));
    for (std::size_t j = 0; j < M; ++j) {
        double v = diag_[j] * u[static_cast<Eigen::Index>(j)];
        if (j > 0) v += off_[j - 1] * u[static_cast<Eigen::Index>(j - 1)];
        if (j + 1 < M) v += off_[j] * u[static_cast<Eigen::Index>(j + 1)];
        out[static_cast<Eigen::Index>(j)] = v * h / weights_[j];
    }
    return out;
}

Eigen::VectorXd DiscreteEllipticOperator::solve(const Eigen::VectorXd& f) const {
    const std::size_t M = size();
    if (static_cast<std::size_t>(f.size()) != M) {
        throw std::invalid_argument("solve: grid function has wrong length");
    }
    const double h = spacing();

    // Thomas elimination; the matrix is SPD so no pivoting is needed.
    std::vector<double> c(M - 1), d(M), rhs(M);
    for (std::size_t j = 0; j < M; ++j) rhs[j] = -f[static_cast<Eigen::Index>(j)] * weights_[j] / h;

    d[0] = diag_[0];
    if (d[0] <= 0.0) throw std::runtime_error("solve: system not positive definite");
    c[0] = off_[0] / d[0];
    rhs[0] /= d[0];
    for (std::size_t j = 1; j < M; ++j) {
        d[j] = diag_[j] - off_[j - 1] * c[j - 1];
        if (d[j] <= 0.0) throw std::runtime_error("solve: system not positive definite");
        rhs[j] = (rhs[j] - off_[j - 1] * rhs[j - 1]) / d[j];
        if (j + 1 < M) c[j] = off_[j] / d[j];
    }
    Eigen::VectorXd u(static_cast<Eigen::Index>(M));
    u[static_cast<Eigen::Index>(M - 1)] = rhs[M - 1];
    for (std::size_t j = M - 1; j > 0; --j) {
        u[static_cast<Eigen::Index>(j - 1)] = rhs[j - 1] - c[j - 1] * u[static_cast<Eigen::Index>(j)];
    }
    return u;
}

double DiscreteEllipticOperator::inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) {
        s += weights_[j] * u[static_cast<Eigen::Index>(j)] * v[static_cast<Eigen::Index>(j)];
    }
    return s;
}

double DiscreteEllipticOperator::norm(const Eigen::VectorXd& u) const {
    return std::sqrt(std::max(0.0, inner(u, u)));
}

double DiscreteEllipticOperator::h1_norm(const Eigen::VectorXd& u) const {
    const double h = spacing();
    double grad = 0.0;
    for (std::size_t j = 0; j + 1 < size(); ++j) {
        const double du = (u[static_cast<Eigen::Index>(j + 1)] - u[static_cast<Eigen::Index>(j)]) / h;
        grad += h * du * du;
    }
    return std::sqrt(inner(u, u) + grad);
}

double EigenBasis::inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        s += weights[j] * u[static_cast<Eigen::Index>(j)] * v[static_cast<Eigen::Index>(j)];
    }
    return s;
}

namespace {

// Tridiagonal solve with row-regularized pivots; used by inverse iteration
// where the shifted matrix is near-singular on purpose.
Eigen::VectorXd solve_shifted_tridiagonal(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                                          double shift, Eigen::VectorXd rhs) {
    const Eigen::Index n = diag.size();
    Eigen::VectorXd d(n), c(n - 1);
    const double floor_pivot = 1e-300;
    d[0] = diag[0] - shift;
    if (std::abs(d[0]) < floor_pivot) d[0] = std::copysign(floor_pivot, d[0] >= 0.0 ? 1.0 : -1.0);
    c[0] = sub[0] / d[0];
    rhs[0] /= d[0];
    for (Eigen::Index j = 1; j < n; ++j) {
        d[j] = diag[j] - shift - sub[j - 1] * c[j - 1];
        if (std::abs(d[j]) < floor_pivot) d[j] = std::copysign(floor_pivot, d[j] >= 0.0 ? 1.0 : -1.0);
        rhs[j] = (rhs[j] - sub[j - 1] * rhs[j - 1]) / d[j];
        if (j + 1 < n) c[j] = sub[j] / d[j];
    }
    for (Eigen::Index j = n - 2; j >= 0; --j) rhs[j] -= c[j] * rhs[j + 1];
    return rhs;
}

}  // namespace

EigenBasis eigenbasis(const DiscreteEllipticOperator& op, std::size_t m) {
    const std::size_t M = op.size();
    if (m < 1 || m > M) throw std::invalid_argument("eigenbasis: need 1 <= m <= grid_points");
    const double h = op.spacing();
    const auto& w = op.mass_weights();

    // Similarity transform to an ordinary symmetric tridiagonal problem:
    // B = W^{-1/2} (h A) W^{-1/2}; eigenvectors map back as psi = W^{-1/2} z.
    const Eigen::MatrixXd A = op.dense();
    Eigen::VectorXd diag(static_cast<Eigen::Index>(M)), sub(static_cast<Eigen::Index>(M - 1));
    for (std::size_t j = 0; j < M; ++j) {
        diag[static_cast<Eigen::Index>(j)] = h * A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) / w[j];
    }
    for (std::size_t j = 0; j + 1 < M; ++j) {
        sub[static_cast<Eigen::Index>(j)] =
            h * A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j + 1)) / std::sqrt(w[j] * w[j + 1]);
    }

    // Leading eigenvectors come from shifted inverse iteration against the
    // eigenvalues-only QL pass; accumulating the full M x M eigenvector
    // matrix is cubic in M and only pays off when most of it is wanted.
    const bool want_most = 8 * m >= M;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub,
                              want_most ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigenbasis: tridiagonal QL failed");

    EigenBasis basis;
    basis.weights = w;
    basis.values.resize(m);
    basis.vectors.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(m));

    Eigen::MatrixXd z(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(m));
    if (want_most) {
        z = es.eigenvectors().leftCols(static_cast<Eigen::Index>(m));
    } else {
        const double scale = std::max(diag.cwiseAbs().maxCoeff(), 1.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double lambda = es.eigenvalues()[static_cast<Eigen::Index>(i)];
            // Deterministic start with no zero pattern shared across modes.
            Eigen::VectorXd v(static_cast<Eigen::Index>(M));
            for (std::size_t j = 0; j < M; ++j) {
                v[static_cast<Eigen::Index>(j)] =
                    std::cos(0.7 * static_cast<double>(j + 1) * static_cast<double>(i + 1) + 0.3);
            }
            v.normalize();
            for (int sweep = 0; sweep < 4; ++sweep) {
                v = solve_shifted_tridiagonal(diag, sub, lambda + 1e-12 * scale, std::move(v));
                for (std::size_t l = 0; l < i; ++l) {
                    const auto prev = z.col(static_cast<Eigen::Index>(l));
                    v -= prev.dot(v) * prev;
                }
                const double nrm = v.norm();
                if (nrm == 0.0) throw std::runtime_error("eigenbasis: inverse iteration broke down");
                v /= nrm;
            }
            z.col(static_cast<Eigen::Index>(i)) = v;
        }
    }

    for (std::size_t i = 0; i < m; ++i) {
        basis.values[i] = es.eigenvalues()[static_cast<Eigen::Index>(i)];
        Eigen::VectorXd psi = z.col(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < M; ++j) psi[static_cast<Eigen::Index>(j)] /= std::sqrt(w[j]);
        // Deterministic sign: largest-magnitude entry positive.
        Eigen::Index arg = 0;
        psi.cwiseAbs().maxCoeff(&arg);
        if (psi[arg] < 0.0) psi = -psi;
        basis.vectors.col(static_cast<Eigen::Index>(i)) = psi;
    }

    // Modified Gram-Schmidt in the weighted inner product tightens the Gram
    // identity for clustered eigenvalues.
    for (std::size_t i = 0; i < m; ++i) {
        Eigen::VectorXd v = basis.vectors.col(static_cast<Eigen::Index>(i));
        for (std::size_t l = 0; l < i; ++l) {
            const Eigen::VectorXd prev = basis.vectors.col(static_cast<Eigen::Index>(l));
            v -= basis.inner(prev, v) * prev;
        }
        const double nrm = std::sqrt(basis.inner(v, v));
        if (nrm <= 0.0) throw std::runtime_error("eigenbasis: degenerate eigenvector");
        basis.vectors.col(static_cast<Eigen::Index>(i)) = v / nrm;
    }
    return basis;
}

Eigen::VectorXd project(const EigenBasis& basis, const Eigen::VectorXd& u) {
    if (static_cast<std::size_t>(u.size()) != basis.weights.size()) {
        throw std::invalid_argument("project: grid function has wrong length");
    }
    Eigen::VectorXd coeffs(static_cast<Eigen::Index>(basis.count()));
    for (std::size_t i = 0; i < basis.count(); ++i) {
        coeffs[static_cast<Eigen::Index>(i)] = basis.inner(basis.vectors.col(static_cast<Eigen::Index>(i)), u);
    }
    return coeffs;
}

Eigen::VectorXd reconstruct(const EigenBasis& basis, const Eigen::VectorXd& coeffs) {
    if (static_cast<std::size_t>(coeffs.size()) != basis.count()) {
        throw std::invalid_argument("reconstruct: coefficient vector has wrong length");
    }
    return basis.vectors * coeffs;
}

Eigen::VectorXd default_profile(const DiscreteEllipticOperator& op) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(op.size()));
    for (std::size_t j = 0; j < op.size(); ++j) {
        g[static_cast<Eigen::Index>(j)] = std::cos(std::numbers::pi * op.grid()[j] / op.length());
    }
    return g;
}

double manufactured_max_error(double length, std::size_t grid_points, double k_const,
                              const std::function<double(double)>& a_coeff) {
    EllipticProblem problem;
    problem.length = length;
    problem.grid_points = grid_points;
    problem.k_coeff = [k_const](double) { return k_const; };
    problem.a_coeff = a_coeff;
    const auto op = assemble(problem);

    const double omega = std::numbers::pi / length;
    const auto n = static_cast<Eigen::Index>(grid_points);
    Eigen::VectorXd f(n), exact(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double y = op.grid()[static_cast<std::size_t>(j)];
        exact[j] = std::cos(omega * y);
        f[j] = -(k_const * omega * omega + a_coeff(y)) * exact[j];
    }
    const Eigen::VectorXd u = op.solve(f);
    return (u - exact).cwiseAbs().maxCoeff();
}

void write_grid_function_csv(std::ostream& out, const std::vector<double>& grid,
                             const Eigen::VectorXd& values) {
    out << "y,value\n";
    char buf[64];
    for (std::size_t j = 0; j < grid.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", grid[j], values[static_cast<Eigen::Index>(j)]);
        out << buf << '\n';
    }
}

void write_eigenbasis_csv(std::ostream& out, const std::vector<double>& grid,
                          const EigenBasis& basis) {
    out << "y";
    for (std::size_t i = 0; i < basis.count(); ++i) out << ",psi_" << (i + 1);
    out << '\n';
    char buf[64];
    for (std::size_t j = 0; j < grid.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", grid[j]);
        out << buf;
        for (std::size_t i = 0; i < basis.count(); ++i) {
            std::snprintf(buf, sizeof(buf), ",%.17g",
                          basis.vectors(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)));
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace grkbs
