#pragma once

#include "assembly.hpp"
#include "errors.hpp"
#include "fespace.hpp"
#include "linsolve.hpp"
#include "mesh.hpp"
#include "weights.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace shiftdg {

/// Smallest generalized eigenvalue mu of ((B + B^T)/2 - G/2) v = mu G v.
/// mu >= 0 certifies B(v, v) >= |||v|||^2 / 2 on the discrete space.
/// Dense solve; meant for the moderate sizes of coercivity checks.
inline double coercivity_margin(const SparseMatrix& b, const SparseMatrix& g)
{
    if (b.size() != g.size()) {
        throw InvalidConfig("coercivity_margin: B and G differ in size");
    }
    const int n = b.size();
    Eigen::MatrixXd bd = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd gd = Eigen::MatrixXd::Zero(n, n);
    for (const Triplet& t : b.triplets()) {
        bd(t.row, t.col) += t.value;
    }
    for (const Triplet& t : g.triplets()) {
        gd(t.row, t.col) += t.value;
    }
    if ((gd - gd.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, gd.cwiseAbs().maxCoeff())) {
        throw InvalidConfig("coercivity_margin: G is not symmetric");
    }
    if (Eigen::LLT<Eigen::MatrixXd>(gd).info() != Eigen::Success) {
        throw InvalidConfig("coercivity_margin: G is not positive definite");
    }
    const Eigen::MatrixXd sym = 0.5 * (bd + bd.transpose()) - 0.5 * gd;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, gd, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) {
        throw NumericalError("coercivity_margin: eigenvalue solver failed");
    }
    return es.eigenvalues().minCoeff();
}

struct StationaryOptions {
    int quad_points = 0;        ///< Gauss points per cell; 0 means k + 2
    bool resolve_layers = false; ///< split cells on the eps scale near 0, 1, 2
    int margin_max_size = 2000; ///< skip the dense eigenvalue check above this many unknowns
};

struct StationaryResult {
    DiscreteField field;                                   ///< u_h including the boundary lift
    double coercivity_margin = std::numeric_limits<double>::quiet_NaN();
    double galerkin_residual_max = 0.0;                    ///< max_i |F(phi_i) - B(u_h, phi_i)|
    double load_norm = 0.0;                                ///< max_i |F(phi_i)|
    std::vector<std::string> warnings;
};

/// Coefficients of the homogeneous problem for u~ = u - l with the affine lift
/// l(x) = (1 - x/2) phi(0) + (x/2) right_value, extended linearly to [-1, 2].
inline StationaryCoefficients lift_coefficients(const StationaryCoefficients& c)
{
    const double left = c.phi(0.0);
    const double right = c.right_value;
    if (left == 0.0 && right == 0.0) {
        return c;
    }
    auto lift = [left, right](double x) { return (1.0 - 0.5 * x) * left + 0.5 * x * right; };
    StationaryCoefficients out = c;
    out.f = [c, lift](double x) { return c.f(x) - c.a(x) * lift(x) - c.b(x) * lift(x - 1.0); };
    out.phi = [c, lift](double y) { return c.phi(y) - lift(y); };
    out.right_value = 0.0;
    return out;
}

inline StationaryResult solve_stationary_on_space(const StationaryCoefficients& coeffs,
                                                  std::shared_ptr<const FeSpace> space, WeightKind weight_kind,
                                                  const StationaryOptions& opts = {})
{
    StationaryResult result;
    result.warnings = check_coefficients(coeffs);
    const Weight weight = make_weight(weight_kind, coeffs.epsilon, coeffs.alpha);
    const CellQuadrature quad(*space, weight, opts.quad_points, opts.resolve_layers);

    const StationaryCoefficients lifted = lift_coefficients(coeffs);
    const SparseMatrix b = assemble_bilinear(quad, lifted);
    const std::vector<double> load = assemble_load(quad, lifted);
    const std::vector<double> u = solve(lu_factor(b), load);

    const std::vector<double> bu = b * u;
    for (std::size_t i = 0; i < load.size(); ++i) {
        result.galerkin_residual_max = std::max(result.galerkin_residual_max, std::abs(load[i] - bu[i]));
        result.load_norm = std::max(result.load_norm, std::abs(load[i]));
    }
    if (b.size() <= opts.margin_max_size) {
        result.coercivity_margin = coercivity_margin(b, assemble_triple_gram(quad, coeffs.epsilon, coeffs.gamma));
    }

    const double left = coeffs.phi(0.0);
    const double right = coeffs.right_value;
    result.field.space = space;
    result.field.coefficients = embed_free(*space, u);
    const auto& xs = space->dof_coordinates();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        result.field.coefficients[i] += (1.0 - 0.5 * xs[i]) * left + 0.5 * xs[i] * right;
    }
    return result;
}

inline StationaryResult solve_stationary(const StationaryCoefficients& coeffs, const MeshConfig& mesh_cfg, int degree,
                                         WeightKind weight_kind, const StationaryOptions& opts = {})
{
    return solve_stationary_on_space(coeffs, build_fespace(build_mesh(mesh_cfg), degree), weight_kind, opts);
}

} // namespace shiftdg
