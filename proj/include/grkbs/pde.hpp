#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <ostream>
#include <vector>

namespace grkbs {

/// Elliptic Neumann problem on [0, length]:
///   (k u')' - a u = f,   u'(0) = u'(length) = 0,
/// with k >= k0 > 0 and a > 0 sampled from callables on a uniform grid.
struct EllipticProblem {
    double length = 1.0;
    std::size_t grid_points = 3;
    std::function<double(double)> k_coeff;
    std::function<double(double)> a_coeff;
};

/// Symmetric tridiagonal discretization of the negated operator.
///
/// The stored matrix is the half-weighted form: interior row
/// [-k_{j-1/2}/h^2, (k_{j-1/2}+k_{j+1/2})/h^2 + a_j, -k_{j+1/2}/h^2],
/// boundary rows closed by ghost-node reflection and scaled by 1/2 so the
/// matrix stays symmetric. Nodal operator application and the solve restore
/// the trapezoid weighting.
class DiscreteEllipticOperator {
public:
    DiscreteEllipticOperator(double length, std::vector<double> diag, std::vector<double> off,
                             std::vector<double> weights, std::vector<double> grid, double min_a);

    std::size_t size() const { return diag_.size(); }
    double spacing() const { return grid_[1] - grid_[0]; }
    double length() const { return length_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& mass_weights() const { return weights_; }
    double min_reaction() const { return min_a_; }

    /// Dense copy of the stored symmetric tridiagonal matrix.
    Eigen::MatrixXd dense() const;

    /// Nodal application of the discrete negated operator (-L_h u).
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

    /// Solution operator: returns u with L_h u = f, i.e. (-L_h) u = -f.
    Eigen::VectorXd solve(const Eigen::VectorXd& f) const;

    /// Trapezoid inner product and norm on grid functions.
    double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
    double norm(const Eigen::VectorXd& u) const;

    /// Discrete H1 norm (adds the midpoint-difference gradient term).
    double h1_norm(const Eigen::VectorXd& u) const;

private:
    double length_;
    std::vector<double> diag_;
    std::vector<double> off_;
    std::vector<double> weights_;
    std::vector<double> grid_;
    double min_a_;
};

DiscreteEllipticOperator assemble(const EllipticProblem& problem);

/// Leading eigenpairs of the weighted problem, W-orthonormal eigenvectors.
struct EigenBasis {
    std::vector<double> values;    // ascending
    Eigen::MatrixXd vectors;       // grid_points x count
    std::vector<double> weights;   // trapezoid weights used for inner products

    std::size_t count() const { return values.size(); }
    double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
};

EigenBasis eigenbasis(const DiscreteEllipticOperator& op, std::size_t m);

/// Coefficients (<u, psi_i>_W)_{i=1..m} of the spectral projection.
Eigen::VectorXd project(const EigenBasis& basis, const Eigen::VectorXd& u);

/// Grid function sum_i c_i psi_i.
Eigen::VectorXd reconstruct(const EigenBasis& basis, const Eigen::VectorXd& coeffs);

/// Default charge profile g(y) = cos(pi y / length) sampled on the grid.
Eigen::VectorXd default_profile(const DiscreteEllipticOperator& op);

/// Max-norm error of the discrete solve against u(y) = cos(pi y / L) with
/// forcing f = -(k pi^2/L^2 + a) cos(pi y / L); requires constant k.
double manufactured_max_error(double length, std::size_t grid_points, double k_const,
                              const std::function<double(double)>& a_coeff);

void write_grid_function_csv(std::ostream& out, const std::vector<double>& grid,
                             const Eigen::VectorXd& values);
void write_eigenbasis_csv(std::ostream& out, const std::vector<double>& grid,
                          const EigenBasis& basis);

}  // namespace grkbs
