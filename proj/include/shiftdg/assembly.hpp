#pragma once

#include "errors.hpp"
#include "fespace.hpp"
#include "sparse.hpp"
#include "weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace shiftdg {

/// Data of the stationary problem
///   -eps^2 u'' + a u + b u(x-1) = f on (0, 2),  u = phi on (-1, 0],  u(2) = right_value.
struct StationaryCoefficients {
    std::function<double(double)> a;
    std::function<double(double)> b;
    std::function<double(double)> f;
    std::function<double(double)> phi;
    double right_value = 0.0;
    double alpha = 1.0;
    double gamma = 1.0;
    double epsilon = 1e-2;
};

/// Check a >= alpha^2 on a dense grid (error) and alpha^2 - max|b| >= gamma (warning only).
inline std::vector<std::string> check_coefficients(const StationaryCoefficients& c, int samples = 2001)
{
    if (!(c.epsilon > 0.0) || c.epsilon > 1.0) {
        throw InvalidConfig("coefficients: epsilon must lie in (0, 1]");
    }
    double a_min = std::numeric_limits<double>::infinity();
    double b_max = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = 2.0 * i / (samples - 1);
        a_min = std::min(a_min, c.a(x));
        b_max = std::max(b_max, std::abs(c.b(x)));
    }
    const double alpha2 = c.alpha * c.alpha;
    if (a_min < alpha2 * (1.0 - 1e-12)) {
        throw InvalidConfig("coefficients: min a = " + std::to_string(a_min) + " is below alpha^2 = " +
                            std::to_string(alpha2));
    }
    std::vector<std::string> warnings;
    if (alpha2 - b_max < c.gamma) {
        warnings.push_back("alpha^2 - max|b| = " + std::to_string(alpha2 - b_max) + " is below gamma = " +
                           std::to_string(c.gamma) + "; coercivity is not guaranteed");
    }
    return warnings;
}

/// Quadrature points, weight values and shape functions of every cell of a space,
/// computed once and shared by all assembly routines. By default every cell gets one
/// Gauss rule; `resolve_layers` splits cells on the eps scale around the layer points.
class CellQuadrature {
public:
    struct Point {
        double x;
        double w;
        double beta;
        double dbeta;
    };

    CellQuadrature(const FeSpace& space, const Weight& weight, int points_per_piece = 0, bool resolve_layers = false)
        : space_(&space), nb_(space.degree() + 1)
    {
        const int n = points_per_piece > 0 ? points_per_piece : space.degree() + 2;
        const QuadRule rule = gauss_rule(n);
        const Mesh1D& mesh = space.mesh();
        offsets_.reserve(mesh.cells() + 1);
        offsets_.push_back(0);
        std::vector<CellPoint> pts;
        for (int c = 0; c < mesh.cells(); ++c) {
            const double x0 = mesh.nodes[c];
            const double h = mesh.width(c);
            if (resolve_layers) {
                cell_points(x0, mesh.nodes[c + 1], rule, weight, pts);
            } else {
                cell_points(x0, mesh.nodes[c + 1], rule, pts);
            }
            for (const CellPoint& p : pts) {
                points_.push_back({p.x, p.w, weight(p.x), weight.derivative(p.x)});
                const std::size_t at = phi_.size();
                phi_.resize(at + nb_);
                dphi_.resize(at + nb_);
                space.shape(p.s, h, std::span(phi_).subspan(at, nb_), std::span(dphi_).subspan(at, nb_));
            }
            offsets_.push_back(static_cast<int>(points_.size()));
        }
    }

    [[nodiscard]] const FeSpace& space() const { return *space_; }
    [[nodiscard]] int basis_size() const { return nb_; }
    [[nodiscard]] int begin(int cell) const { return offsets_[cell]; }
    [[nodiscard]] int end(int cell) const { return offsets_[cell + 1]; }
    [[nodiscard]] const Point& point(int p) const { return points_[p]; }
    [[nodiscard]] std::span<const double> phi(int p) const { return std::span(phi_).subspan(std::size_t(p) * nb_, nb_); }
    [[nodiscard]] std::span<const double> dphi(int p) const { return std::span(dphi_).subspan(std::size_t(p) * nb_, nb_); }

private:
    const FeSpace* space_;
    int nb_;
    std::vector<int> offsets_;
    std::vector<Point> points_;
    std::vector<double> phi_;
    std::vector<double> dphi_;
};

namespace detail {

/// Scatter a local (k+1)x(k+1) block into free-dof triplets; rows from `row_cell`, columns from `col_cell`.
inline void scatter_block(const FeSpace& space, int row_cell, int col_cell, std::span<const double> local,
                          std::vector<Triplet>& out)
{
    const int nb = space.degree() + 1;
    for (int i = 0; i < nb; ++i) {
        const int gi = space.dof(row_cell, i);
        if (space.is_dirichlet(gi)) {
            continue;
        }
        for (int j = 0; j < nb; ++j) {
            const int gj = space.dof(col_cell, j);
            if (space.is_dirichlet(gj)) {
                continue;
            }
            out.push_back({gi - 1, gj - 1, local[i * nb + j]});
        }
    }
}

} // namespace detail

/// Matrix of B_beta(u, v) = eps^2 <u', (beta v)'> + <a u, v>_beta + <b u(.-1), v>_{beta,(1,2)}
/// over the free dofs; entry (i, j) = B_beta(phi_j, phi_i). The shift block maps each
/// trial function on a cell of [1, 2] to the same local function on the translated cell.
inline SparseMatrix assemble_bilinear(const CellQuadrature& quad, const StationaryCoefficients& c)
{
    const FeSpace& space = quad.space();
    const Mesh1D& mesh = space.mesh();
    if (mesh.cells() % 2 != 0 || mesh.nodes[mesh.half()] != 1.0) {
        throw StructuralError("assemble_bilinear: mesh has no node at x = 1");
    }
    for (int i = 0; i <= mesh.half(); ++i) {
        if (mesh.nodes[mesh.half() + i] != 1.0 + mesh.nodes[i]) {
            throw StructuralError("assemble_bilinear: mesh is not translation symmetric about x = 1");
        }
    }
    const int nb = quad.basis_size();
    const double eps2 = c.epsilon * c.epsilon;
    std::vector<double> local(nb * nb);
    std::vector<double> shift(nb * nb);
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(mesh.cells()) * nb * nb * 2);
    for (int cell = 0; cell < mesh.cells(); ++cell) {
        const bool shifted = cell >= mesh.half();
        std::fill(local.begin(), local.end(), 0.0);
        std::fill(shift.begin(), shift.end(), 0.0);
        for (int p = quad.begin(cell); p < quad.end(cell); ++p) {
            const auto& pt = quad.point(p);
            const auto phi = quad.phi(p);
            const auto dphi = quad.dphi(p);
            const double av = c.a(pt.x) * pt.beta * pt.w;
            const double bv = shifted ? c.b(pt.x) * pt.beta * pt.w : 0.0;
            for (int i = 0; i < nb; ++i) {
                const double test_d = eps2 * pt.w * (pt.beta * dphi[i] + pt.dbeta * phi[i]);
                for (int j = 0; j < nb; ++j) {
                    local[i * nb + j] += test_d * dphi[j] + av * phi[j] * phi[i];
                    if (shifted) {
                        shift[i * nb + j] += bv * phi[j] * phi[i];
                    }
                }
            }
        }
        detail::scatter_block(space, cell, cell, local, triplets);
        if (shifted) {
            detail::scatter_block(space, cell, cell - mesh.half(), shift, triplets);
        }
    }
    return SparseMatrix::from_triplets(space.n_free(), std::move(triplets));
}

/// Load vector F_beta(v) = <f, v>_beta - <b phi(.-1), v>_{beta,(0,1)} over the free dofs.
inline std::vector<double> assemble_load(const CellQuadrature& quad, const StationaryCoefficients& c)
{
    const FeSpace& space = quad.space();
    const Mesh1D& mesh = space.mesh();
    const int nb = quad.basis_size();
    std::vector<double> load(space.n_free(), 0.0);
    for (int cell = 0; cell < mesh.cells(); ++cell) {
        const bool history = cell < mesh.half();
        for (int p = quad.begin(cell); p < quad.end(cell); ++p) {
            const auto& pt = quad.point(p);
            double g = c.f(pt.x);
            if (history) {
                g -= c.b(pt.x) * c.phi(pt.x - 1.0);
            }
            g *= pt.beta * pt.w;
            const auto phi = quad.phi(p);
            for (int i = 0; i < nb; ++i) {
                const int gi = space.dof(cell, i);
                if (!space.is_dirichlet(gi)) {
                    load[gi - 1] += g * phi[i];
                }
            }
        }
    }
    return load;
}

namespace detail {

template <typename Kernel>
SparseMatrix assemble_symmetric(const CellQuadrature& quad, Kernel kernel)
{
    const FeSpace& space = quad.space();
    const int nb = quad.basis_size();
    std::vector<double> local(nb * nb);
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(space.cells()) * nb * nb);
    for (int cell = 0; cell < space.cells(); ++cell) {
        std::fill(local.begin(), local.end(), 0.0);
        for (int p = quad.begin(cell); p < quad.end(cell); ++p) {
            const auto& pt = quad.point(p);
            const auto phi = quad.phi(p);
            const auto dphi = quad.dphi(p);
            for (int i = 0; i < nb; ++i) {
                for (int j = 0; j < nb; ++j) {
                    local[i * nb + j] += kernel(pt, phi[i], dphi[i], phi[j], dphi[j]);
                }
            }
        }
        scatter_block(space, cell, cell, local, triplets);
    }
    return SparseMatrix::from_triplets(space.n_free(), std::move(triplets));
}

} // namespace detail

/// Weighted mass matrix, entry (i, j) = <phi_j, phi_i>_beta.
inline SparseMatrix assemble_weighted_mass(const CellQuadrature& quad)
{
    return detail::assemble_symmetric(quad, [](const CellQuadrature::Point& pt, double pi, double, double pj, double) {
        return pt.w * pt.beta * pi * pj;
    });
}

/// Gram matrix of the weighted triple norm eps^2 |v'|_beta^2 + gamma |v|_beta^2.
inline SparseMatrix assemble_triple_gram(const CellQuadrature& quad, double epsilon, double gamma)
{
    const double eps2 = epsilon * epsilon;
    return detail::assemble_symmetric(
        quad, [eps2, gamma](const CellQuadrature::Point& pt, double pi, double di, double pj, double dj) {
            return pt.w * pt.beta * (eps2 * di * dj + gamma * pi * pj);
        });
}

// Convenience overloads that build the quadrature on the fly.

inline SparseMatrix assemble_bilinear(const FeSpace& space, const StationaryCoefficients& c, const Weight& w)
{
    return assemble_bilinear(CellQuadrature(space, w), c);
}

inline std::vector<double> assemble_load(const FeSpace& space, const StationaryCoefficients& c, const Weight& w)
{
    return assemble_load(CellQuadrature(space, w), c);
}

inline SparseMatrix assemble_weighted_mass(const FeSpace& space, const Weight& w)
{
    return assemble_weighted_mass(CellQuadrature(space, w));
}

inline SparseMatrix assemble_triple_gram(const FeSpace& space, const Weight& w, double epsilon, double gamma)
{
    return assemble_triple_gram(CellQuadrature(space, w), epsilon, gamma);
}

} // namespace shiftdg
