#pragma once

#include "errors.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "weights.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

namespace shiftdg {

/// Continuous piecewise degree-k Lagrange space on a Mesh1D with equidistant local nodes.
/// Global dof of local node j in cell c is c*k + j; dofs 0 and k*N are the Dirichlet ones.
class FeSpace {
public:
    FeSpace(Mesh1D mesh, int degree) : mesh_(std::move(mesh)), degree_(degree)
    {
        if (degree < 1 || degree > 8) {
            throw InvalidConfig("FeSpace: degree must lie in [1, 8]");
        }
        ref_nodes_.resize(degree_ + 1);
        for (int j = 0; j <= degree_; ++j) {
            ref_nodes_[j] = static_cast<double>(j) / degree_;
        }
        const int n = mesh_.cells();
        dof_x_.resize(static_cast<std::size_t>(n) * degree_ + 1);
        for (int c = 0; c < n; ++c) {
            const double x0 = mesh_.nodes[c];
            const double h = mesh_.width(c);
            dof_x_[static_cast<std::size_t>(c) * degree_] = x0;
            for (int j = 1; j < degree_; ++j) {
                dof_x_[static_cast<std::size_t>(c) * degree_ + j] = x0 + h * ref_nodes_[j];
            }
        }
        dof_x_.back() = mesh_.nodes.back();
    }

    [[nodiscard]] const Mesh1D& mesh() const { return mesh_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] int cells() const { return mesh_.cells(); }
    [[nodiscard]] int n_dofs() const { return static_cast<int>(dof_x_.size()); }
    /// Unknowns after removing the two Dirichlet dofs; free index = dof - 1.
    [[nodiscard]] int n_free() const { return n_dofs() - 2; }
    [[nodiscard]] const std::vector<double>& dof_coordinates() const { return dof_x_; }
    [[nodiscard]] int dof(int cell, int local) const { return cell * degree_ + local; }
    [[nodiscard]] bool is_dirichlet(int dof) const { return dof == 0 || dof == n_dofs() - 1; }
    /// Dof sitting at x + 1 for a dof at x in [0, 1].
    [[nodiscard]] int translated_dof(int dof) const { return dof + mesh_.half() * degree_; }
    [[nodiscard]] const std::vector<double>& reference_nodes() const { return ref_nodes_; }

    /// Basis values and d/dx on a cell of width h at reference coordinate s in [0, 1].
    void shape(double s, double h, std::span<double> values, std::span<double> derivs) const
    {
        lagrange_values(ref_nodes_, s, values);
        lagrange_derivatives(ref_nodes_, s, derivs);
        for (auto& d : derivs) {
            d /= h;
        }
    }

private:
    Mesh1D mesh_;
    int degree_;
    std::vector<double> ref_nodes_;
    std::vector<double> dof_x_;
};

inline std::shared_ptr<const FeSpace> build_fespace(Mesh1D mesh, int degree)
{
    return std::make_shared<const FeSpace>(std::move(mesh), degree);
}

/// Coefficient vector over all dofs of a space (boundary dofs included).
struct DiscreteField {
    std::shared_ptr<const FeSpace> space;
    std::vector<double> coefficients;
};

inline DiscreteField interpolate(std::shared_ptr<const FeSpace> space, const std::function<double(double)>& g)
{
    DiscreteField field{std::move(space), {}};
    const auto& xs = field.space->dof_coordinates();
    field.coefficients.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        field.coefficients[i] = g(xs[i]);
    }
    return field;
}

/// Value (deriv = 0) or x-derivative (deriv = 1) of the piecewise polynomial with
/// coefficients `coeffs`. At interior nodes the left cell is used.
inline double eval_coefficients(const FeSpace& space, std::span<const double> coeffs, double x, int deriv)
{
    const int cell = space.mesh().locate(x);
    const int k = space.degree();
    const double x0 = space.mesh().nodes[cell];
    const double h = space.mesh().width(cell);
    std::array<double, 9> values{};
    std::array<double, 9> derivs{};
    space.shape((x - x0) / h, h, std::span(values.data(), k + 1), std::span(derivs.data(), k + 1));
    const auto& basis = deriv == 0 ? values : derivs;
    double sum = 0.0;
    for (int j = 0; j <= k; ++j) {
        sum += basis[j] * coeffs[space.dof(cell, j)];
    }
    return sum;
}

inline double eval_field(const DiscreteField& field, double x, int deriv = 0)
{
    if (deriv != 0 && deriv != 1) {
        throw InvalidConfig("eval_field: deriv must be 0 or 1");
    }
    return eval_coefficients(*field.space, field.coefficients, x, deriv);
}

/// Expand a vector over the free dofs into one over all dofs with zero boundary values.
inline std::vector<double> embed_free(const FeSpace& space, std::span<const double> free)
{
    std::vector<double> full(space.n_dofs(), 0.0);
    std::copy(free.begin(), free.end(), full.begin() + 1);
    return full;
}

/// One quadrature point of a cell: position, weight, and reference coordinate.
struct CellPoint {
    double x;
    double w;
    double s;
};

/// Quadrature points of [left, right]: `rule` applied on each piece between consecutive `breaks`
/// (sorted, including both ends).
inline void cell_points(double left, double right, const QuadRule& rule, std::span<const double> breaks,
                        std::vector<CellPoint>& out)
{
    out.clear();
    const double h = right - left;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
        const double rad = 0.5 * (breaks[i + 1] - breaks[i]);
        for (std::size_t p = 0; p < rule.size(); ++p) {
            const double x = mid + rad * rule.nodes[p];
            out.push_back({x, rad * rule.weights[p], (x - left) / h});
        }
    }
}

/// `rule` on the whole of [left, right].
inline void cell_points(double left, double right, const QuadRule& rule, std::vector<CellPoint>& out)
{
    const double ends[2] = {left, right};
    cell_points(left, right, rule, ends, out);
}

/// Quadrature points of [left, right]: `rule` applied on each piece of the
/// layer-resolving partition of the weight plus any extra breakpoints.
inline void cell_points(double left, double right, const QuadRule& rule, const Weight& weight,
                        std::vector<CellPoint>& out, std::span<const double> extra_breaks = {})
{
    std::vector<double> breaks = weight_breakpoints(left, right, weight);
    if (!extra_breaks.empty()) {
        for (double b : extra_breaks) {
            if (b > left && b < right) {
                breaks.push_back(b);
            }
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    }
    cell_points(left, right, rule, breaks, out);
}

/// Field dump: `x,u(x)` at every dof plus `per_cell` uniform interior points per cell.
inline void write_field_csv(std::ostream& os, const DiscreteField& field, int per_cell,
                            const std::function<double(double)>& offset = {})
{
    os << "x,u(x)\n";
    const FeSpace& space = *field.space;
    char buf[96];
    auto emit = [&](double x) {
        double u = eval_field(field, x);
        if (offset) {
            u += offset(x);
        }
        std::snprintf(buf, sizeof buf, "%.10e,%.10e\n", x, u);
        os << buf;
    };
    const int k = space.degree();
    for (int c = 0; c < space.cells(); ++c) {
        std::vector<double> xs;
        for (int j = 0; j < k; ++j) {
            xs.push_back(space.dof_coordinates()[space.dof(c, j)]);
        }
        const double x0 = space.mesh().nodes[c];
        const double h = space.mesh().width(c);
        for (int p = 1; p <= per_cell; ++p) {
            xs.push_back(x0 + h * p / (per_cell + 1.0));
        }
        std::sort(xs.begin(), xs.end());
        for (double x : xs) {
            emit(x);
        }
    }
    emit(space.mesh().nodes.back());
}

} // namespace shiftdg
