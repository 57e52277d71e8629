#pragma once

#include "assembly.hpp"
#include "errors.hpp"
#include "fespace.hpp"
#include "linsolve.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace shiftdg {

/// Parabolic shift problem
///   u_t - eps^2 u_xx + a u + b u(x-1, t) = f  on (0, 2) x (0, T],
///   u(x, 0) = u0(x),  u = phi on (-1, 0] x [0, T],  u(2, t) = psi(t).
struct ProblemSpec {
    double epsilon = 1e-2;
    double alpha = 1.0;
    double gamma = 1.0;
    double T = 1.0;
    std::function<double(double, double)> a;
    std::function<double(double, double)> b;
    std::function<double(double, double)> f;
    std::function<double(double, double)> phi;
    std::function<double(double)> psi;
    std::function<double(double)> u0;
    /// a or b depend on t: the spatial operator is rebuilt at every Radau time.
    bool time_dependent_coefficients = false;
    /// d/dt phi(0, t) and d/dt psi(t); central differences are used when absent.
    std::function<double(double)> phi0_rate;
    std::function<double(double)> psi_rate;

    [[nodiscard]] StationaryCoefficients frozen(double t) const
    {
        StationaryCoefficients c;
        c.a = [a = a, t](double x) { return a(x, t); };
        c.b = [b = b, t](double x) { return b(x, t); };
        c.f = [f = f, t](double x) { return f(x, t); };
        c.phi = [phi = phi, t](double y) { return phi(y, t); };
        c.right_value = psi ? psi(t) : 0.0;
        c.alpha = alpha;
        c.gamma = gamma;
        c.epsilon = epsilon;
        return c;
    }
};

/// Compatibility warnings for the initial and boundary data.
inline std::vector<std::string> check_problem(const ProblemSpec& spec)
{
    if (!(spec.T > 0.0)) {
        throw InvalidConfig("problem: T must be positive");
    }
    std::vector<std::string> warnings = check_coefficients(spec.frozen(0.0));
    if (spec.time_dependent_coefficients) {
        auto w = check_coefficients(spec.frozen(spec.T));
        warnings.insert(warnings.end(), w.begin(), w.end());
    }
    const double tol = 1e-10;
    if (std::abs(spec.u0(0.0) - spec.phi(0.0, 0.0)) > tol) {
        warnings.push_back("u0(0) differs from phi(0, 0)");
    }
    if (std::abs(spec.u0(2.0) - (spec.psi ? spec.psi(0.0) : 0.0)) > tol) {
        warnings.push_back("u0(2) differs from psi(0)");
    }
    return warnings;
}

struct TimeMesh {
    std::vector<double> points;

    static TimeMesh uniform(double t_end, int slabs)
    {
        if (slabs < 1 || !(t_end > 0.0)) {
            throw InvalidConfig("TimeMesh: need at least one slab and T > 0");
        }
        TimeMesh tm;
        tm.points.resize(slabs + 1);
        for (int m = 0; m <= slabs; ++m) {
            tm.points[m] = t_end * m / slabs;
        }
        tm.points.back() = t_end;
        return tm;
    }

    [[nodiscard]] int slabs() const { return static_cast<int>(points.size()) - 1; }
    [[nodiscard]] double width(int m) const { return points[m + 1] - points[m]; }
    [[nodiscard]] double max_width() const
    {
        double w = 0.0;
        for (int m = 0; m < slabs(); ++m) {
            w = std::max(w, width(m));
        }
        return w;
    }
    /// t_{m, i} for slab m (0-based) and reference node t_hat.
    [[nodiscard]] double map(int m, double t_hat) const { return points[m] + 0.5 * width(m) * (1.0 + t_hat); }
};

enum class Side { left, right };

/// Affine-in-x lift of the Dirichlet data: l(x, t) = (1 - x/2) phi(0, t) + (x/2) psi(t).
struct BoundaryLift {
    std::function<double(double)> left;
    std::function<double(double)> right;
    std::function<double(double)> left_rate;
    std::function<double(double)> right_rate;

    [[nodiscard]] double value(double x, double t) const
    {
        return (1.0 - 0.5 * x) * left(t) + 0.5 * x * right(t);
    }
    [[nodiscard]] double slope(double t) const { return 0.5 * (right(t) - left(t)); }
    [[nodiscard]] double rate(double x, double t) const
    {
        return (1.0 - 0.5 * x) * left_rate(t) + 0.5 * x * right_rate(t);
    }
};

namespace detail {

inline std::function<double(double)> central_rate(std::function<double(double)> g)
{
    return [g = std::move(g)](double t) {
        const double h = 1e-3 * std::max(1e-3, std::abs(t)) + 1e-4;
        return (-g(t + 2 * h) + 8.0 * g(t + h) - 8.0 * g(t - h) + g(t - 2 * h)) / (12.0 * h);
    };
}

inline BoundaryLift make_lift(const ProblemSpec& spec)
{
    BoundaryLift lift;
    lift.left = [phi = spec.phi](double t) { return phi(0.0, t); };
    lift.right = spec.psi ? spec.psi : std::function<double(double)>([](double) { return 0.0; });
    lift.left_rate = spec.phi0_rate ? spec.phi0_rate : central_rate(lift.left);
    lift.right_rate = spec.psi_rate ? spec.psi_rate : (spec.psi ? central_rate(spec.psi)
                                                                 : std::function<double(double)>([](double) { return 0.0; }));
    return lift;
}

} // namespace detail

/// dG(q) in time with a continuous Galerkin space: per slab, q+1 spatial vectors holding the
/// values at the Radau times (temporal Lagrange basis). Vectors cover all dofs of the space and
/// hold the lifted unknown u~ = u - l; evaluation adds the lift back.
struct SpaceTimeSolution {
    std::shared_ptr<const FeSpace> space;
    int q = 0;
    TimeMesh tmesh;
    TimeQuadRule rule;
    std::vector<double> initial;             ///< U_0^-
    std::vector<std::vector<double>> stages; ///< index m * (q + 1) + i
    BoundaryLift lift;
    Weight weight;
    double epsilon = 1.0;
    double gamma = 1.0;

    [[nodiscard]] const std::vector<double>& stage(int m, int i) const { return stages[m * (q + 1) + i]; }

    /// Slab holding t: `left` takes (t_{m-1}, t_m], `right` takes [t_{m-1}, t_m); -1 is the initial value.
    [[nodiscard]] int locate(double t, Side side) const
    {
        const auto& pts = tmesh.points;
        const double tol = 1e-12 * std::max(1.0, pts.back());
        if (t < pts.front() - tol || t > pts.back() + tol) {
            throw DomainError("SpaceTimeSolution: t outside [0, T]");
        }
        if (side == Side::left) {
            if (t <= pts.front()) {
                return -1;
            }
            const auto it = std::lower_bound(pts.begin() + 1, pts.end(), t);
            return std::min(static_cast<int>(it - pts.begin()) - 1, tmesh.slabs() - 1);
        }
        const auto it = std::upper_bound(pts.begin(), pts.end(), t);
        return std::clamp(static_cast<int>(it - pts.begin()) - 1, 0, tmesh.slabs() - 1);
    }

    /// Coefficients of u~(., t) over all dofs (lift excluded).
    [[nodiscard]] std::vector<double> coefficients_at(double t, Side side) const
    {
        const int m = locate(t, side);
        if (m < 0) {
            return initial;
        }
        const double t_hat = std::clamp(2.0 * (t - tmesh.points[m]) / tmesh.width(m) - 1.0, -1.0, 1.0);
        std::vector<double> l(q + 1);
        lagrange_values(rule.nodes, t_hat, l);
        std::vector<double> out(space->n_dofs(), 0.0);
        for (int i = 0; i <= q; ++i) {
            const auto& s = stage(m, i);
            for (std::size_t d = 0; d < out.size(); ++d) {
                out[d] += l[i] * s[d];
            }
        }
        return out;
    }
};

/// Value of the discrete solution (lift included) at (x, t); `side` picks the one-sided
/// limit at slab boundaries.
inline double eval_spacetime(const SpaceTimeSolution& sol, double x, double t, Side side = Side::left)
{
    if (x < 0.0 || x > 2.0) {
        throw DomainError("eval_spacetime: x outside [0, 2]");
    }
    const std::vector<double> c = sol.coefficients_at(t, side);
    return eval_coefficients(*sol.space, c, x, 0) + sol.lift.value(x, t);
}

/// Block system of one slab, unknowns ordered stage-major: [U_0; ...; U_q].
///   block (l, j) = w_l L_j'(t_l) M + L_l(-1) L_j(-1) M + delta_lj (tau/2) w_l B(t_l)
/// `stiffness` holds B at each Radau time (a single entry means time independent).
inline SparseMatrix assemble_slab_matrix(const SparseMatrix& mass, std::span<const SparseMatrix> stiffness,
                                         const TimeQuadRule& rule, double tau)
{
    const int nq = static_cast<int>(rule.size());
    const int n = mass.size();
    std::vector<double> start(nq);
    lagrange_values(rule.nodes, -1.0, start);
    std::vector<double> deriv(nq);
    std::vector<Triplet> triplets;
    triplets.reserve(mass.nonzeros() * nq * nq + stiffness[0].nonzeros() * nq);
    for (int l = 0; l < nq; ++l) {
        lagrange_derivatives(rule.nodes, rule.nodes[l], deriv);
        for (int j = 0; j < nq; ++j) {
            const double coef = rule.weights[l] * deriv[j] + start[l] * start[j];
            if (coef != 0.0) {
                mass.append_to(triplets, coef, l * n, j * n);
            }
        }
        const SparseMatrix& b = stiffness.size() == 1 ? stiffness[0] : stiffness[l];
        b.append_to(triplets, 0.5 * tau * rule.weights[l], l * n, l * n);
    }
    return SparseMatrix::from_triplets(nq * n, std::move(triplets));
}

/// Right-hand side of one slab: (tau/2) w_l F(t_l) + L_l(-1) M U_prev.
inline std::vector<double> assemble_slab_rhs(const SparseMatrix& mass, std::span<const std::vector<double>> loads,
                                             std::span<const double> previous, const TimeQuadRule& rule, double tau)
{
    const int nq = static_cast<int>(rule.size());
    const int n = mass.size();
    std::vector<double> start(nq);
    lagrange_values(rule.nodes, -1.0, start);
    const std::vector<double> mu = mass * previous;
    std::vector<double> rhs(static_cast<std::size_t>(nq) * n);
    for (int l = 0; l < nq; ++l) {
        for (int i = 0; i < n; ++i) {
            rhs[l * n + i] = 0.5 * tau * rule.weights[l] * loads[l][i] + start[l] * mu[i];
        }
    }
    return rhs;
}

/// Semi-discrete operators of a parabolic solve on a fixed space.
struct DiscreteProblem {
    SparseMatrix mass;
    std::function<SparseMatrix(double t)> stiffness;
    std::function<std::vector<double>(double t)> load; ///< over free dofs
    std::vector<double> initial;                        ///< U_0^- over free dofs
    bool time_dependent_operator = false;
};

/// Slab-by-slab dG(q) solve of M U' + B(t) U = F(t). Returns the stage vectors over free dofs.
inline std::vector<std::vector<double>> dg_march(const DiscreteProblem& prob, const TimeMesh& tmesh, const TimeQuadRule& rule)
{
    const int nq = static_cast<int>(rule.size());
    const int n = prob.mass.size();
    std::vector<std::vector<double>> stages;
    stages.reserve(static_cast<std::size_t>(tmesh.slabs()) * nq);
    std::vector<double> previous = prob.initial;
    std::vector<SparseMatrix> stiffness;
    if (!prob.time_dependent_operator) {
        stiffness.push_back(prob.stiffness(0.0));
    }
    Factorization fact;
    double factored_tau = -1.0;
    std::vector<std::vector<double>> loads(nq);
    for (int m = 0; m < tmesh.slabs(); ++m) {
        const double tau = tmesh.width(m);
        if (prob.time_dependent_operator) {
            stiffness.clear();
            for (int l = 0; l < nq; ++l) {
                stiffness.push_back(prob.stiffness(tmesh.map(m, rule.nodes[l])));
            }
        }
        if (prob.time_dependent_operator || !fact.valid() || std::abs(tau - factored_tau) > 1e-14 * tau) {
            fact = lu_factor(assemble_slab_matrix(prob.mass, stiffness, rule, tau));
            factored_tau = tau;
        }
        for (int l = 0; l < nq; ++l) {
            loads[l] = prob.load(tmesh.map(m, rule.nodes[l]));
        }
        const std::vector<double> x = solve(fact, assemble_slab_rhs(prob.mass, loads, previous, rule, tau));
        for (int l = 0; l < nq; ++l) {
            stages.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(l) * n,
                                x.begin() + static_cast<std::ptrdiff_t>(l + 1) * n);
        }
        previous = stages.back();
    }
    return stages;
}

enum class InitialApproximation { interpolant, weighted_projection };

struct DgOptions {
    int quad_points = 0;         ///< Gauss points per cell; 0 means k + 2
    bool resolve_layers = false; ///< split cells on the eps scale near 0, 1, 2
    InitialApproximation initial = InitialApproximation::interpolant;
};

/// Full dG(q) x continuous P_k solve with weight `weight_kind` on the mesh from `mesh_cfg`.
inline SpaceTimeSolution dg_solve_on_space(const ProblemSpec& spec, std::shared_ptr<const FeSpace> space, int q,
                                           const TimeMesh& tmesh, WeightKind weight_kind, const DgOptions& opts = {})
{
    if (tmesh.points.empty() || std::abs(tmesh.points.back() - spec.T) > 1e-12 * spec.T) {
        throw InvalidConfig("dg_solve: time mesh does not end at T");
    }
    SpaceTimeSolution sol;
    sol.space = space;
    sol.q = q;
    sol.tmesh = tmesh;
    sol.rule = radau_rule(q);
    sol.lift = detail::make_lift(spec);
    sol.weight = make_weight(weight_kind, spec.epsilon, spec.alpha);
    sol.epsilon = spec.epsilon;
    sol.gamma = spec.gamma;

    const CellQuadrature quad(*space, sol.weight, opts.quad_points, opts.resolve_layers);
    const BoundaryLift lift = sol.lift;

    DiscreteProblem prob;
    prob.mass = assemble_weighted_mass(quad);
    prob.time_dependent_operator = spec.time_dependent_coefficients;
    prob.stiffness = [&spec, &quad](double t) { return assemble_bilinear(quad, spec.frozen(t)); };
    prob.load = [&spec, &quad, &lift](double t) {
        StationaryCoefficients c = spec.frozen(t);
        const double l0 = lift.left(t);
        const double l2 = lift.right(t);
        if (l0 != 0.0 || l2 != 0.0) {
            const double r0 = lift.left_rate(t);
            const double r2 = lift.right_rate(t);
            auto ell = [l0, l2](double x) { return (1.0 - 0.5 * x) * l0 + 0.5 * x * l2; };
            auto rate = [r0, r2](double x) { return (1.0 - 0.5 * x) * r0 + 0.5 * x * r2; };
            c.f = [&spec, t, ell, rate](double x) {
                return spec.f(x, t) - rate(x) - spec.a(x, t) * ell(x) - spec.b(x, t) * ell(x - 1.0);
            };
            c.phi = [&spec, t, ell](double y) { return spec.phi(y, t) - ell(y); };
        }
        return assemble_load(quad, c);
    };

    auto initial_shifted = [&spec, &lift](double x) { return spec.u0(x) - lift.value(x, 0.0); };
    const DiscreteField u0h = interpolate(space, initial_shifted);
    if (opts.initial == InitialApproximation::interpolant) {
        prob.initial.assign(u0h.coefficients.begin() + 1, u0h.coefficients.end() - 1);
    } else {
        // weighted L2 projection onto the free dofs
        StationaryCoefficients c;
        c.f = initial_shifted;
        c.a = [](double) { return 0.0; };
        c.b = [](double) { return 0.0; };
        c.phi = [](double) { return 0.0; };
        prob.initial = solve(lu_factor(prob.mass), assemble_load(quad, c));
    }

    const auto stages = dg_march(prob, tmesh, sol.rule);
    sol.initial = embed_free(*space, prob.initial);
    sol.stages.reserve(stages.size());
    for (const auto& s : stages) {
        sol.stages.push_back(embed_free(*space, s));
    }
    return sol;
}

inline SpaceTimeSolution dg_solve(const ProblemSpec& spec, const MeshConfig& mesh_cfg, int degree, int q,
                                  const TimeMesh& tmesh, WeightKind weight_kind, const DgOptions& opts = {})
{
    return dg_solve_on_space(spec, build_fespace(build_mesh(mesh_cfg), degree), q, tmesh, weight_kind, opts);
}

/// Space-time dump `t,x,u` at the given times (left limits), sampled at the mesh nodes plus
/// `per_cell` uniform interior points per cell.
inline void write_spacetime_csv(std::ostream& os, const SpaceTimeSolution& sol, std::span<const double> times, int per_cell)
{
    if (per_cell < 0) {
        throw InvalidConfig("write_spacetime_csv: per_cell must be non-negative");
    }
    os << "t,x,u\n";
    const Mesh1D& mesh = sol.space->mesh();
    char buf[128];
    for (double t : times) {
        const std::vector<double> c = sol.coefficients_at(t, Side::left);
        auto emit = [&](double x) {
            const double u = eval_coefficients(*sol.space, c, x, 0) + sol.lift.value(x, t);
            std::snprintf(buf, sizeof buf, "%.10e,%.10e,%.10e\n", t, x, u);
            os << buf;
        };
        for (int cell = 0; cell < mesh.cells(); ++cell) {
            emit(mesh.nodes[cell]);
            for (int j = 1; j <= per_cell; ++j) {
                emit(mesh.nodes[cell] + mesh.width(cell) * j / (per_cell + 1));
            }
        }
        emit(mesh.nodes.back());
    }
}

} // namespace shiftdg
