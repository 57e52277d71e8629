#pragma once

#include "assembly.hpp"
#include "errors.hpp"
#include "fespace.hpp"
#include "mesh.hpp"
#include "stationary.hpp"
#include "timedg.hpp"
#include "weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace shiftdg {

// ---------------------------------------------------------------------------
// Layer templates

enum class LayerKind { left, interior, right, smooth };

inline LayerKind parse_layer_kind(std::string_view name)
{
    if (name == "left") return LayerKind::left;
    if (name == "interior") return LayerKind::interior;
    if (name == "right") return LayerKind::right;
    if (name == "smooth") return LayerKind::smooth;
    throw InvalidConfig("unknown layer kind '" + std::string(name) + "'");
}

/// Model components of the solution: exp(-a x/e), exp(-a|x-1|/e), exp(-a(2-x)/e), or cos(x).
struct LayerTemplate {
    LayerKind kind = LayerKind::left;
    double epsilon = 1e-2;
    double alpha = 1.0;

    /// order-th derivative, order in {0, 1, 2}; the interior kink uses the left limit.
    [[nodiscard]] double derivative(double x, int order) const
    {
        const double r = alpha / epsilon;
        switch (kind) {
        case LayerKind::left: return std::pow(-r, order) * std::exp(-r * x);
        case LayerKind::right: return std::pow(r, order) * std::exp(-r * (2.0 - x));
        case LayerKind::interior: {
            const double s = x > 1.0 ? -r : r;
            return std::pow(s, order) * std::exp(-r * std::abs(x - 1.0));
        }
        case LayerKind::smooth:
            switch (order) {
            case 0: return std::cos(x);
            case 1: return -std::sin(x);
            default: return -std::cos(x);
            }
        }
        return 0.0;
    }
    [[nodiscard]] double operator()(double x) const { return derivative(x, 0); }

    /// The exponential the derivatives are bounded by (1 for the smooth part).
    [[nodiscard]] double envelope(double x) const
    {
        const double r = alpha / epsilon;
        switch (kind) {
        case LayerKind::left: return std::exp(-r * x);
        case LayerKind::right: return std::exp(-r * (2.0 - x));
        case LayerKind::interior: return std::exp(-r * std::abs(x - 1.0));
        case LayerKind::smooth: return 1.0;
        }
        return 1.0;
    }
};

// ---------------------------------------------------------------------------
// Spatial error functionals

namespace detail {

/// Quadrature points on [0, 2] refined at the mesh nodes of one or two spaces and
/// around the layer points on the eps scale.
struct ErrorPoints {
    std::vector<double> x;
    std::vector<double> w;
};

inline ErrorPoints error_points(const FeSpace& primary, const FeSpace* secondary, double epsilon, double alpha, int n_gauss)
{
    const QuadRule rule = gauss_rule(n_gauss);
    const Weight resolve = Weight::balanced(epsilon, alpha);
    ErrorPoints out;
    std::vector<CellPoint> pts;
    const Mesh1D& mesh = primary.mesh();
    for (int c = 0; c < mesh.cells(); ++c) {
        std::span<const double> extra;
        std::vector<double> inner;
        if (secondary) {
            const auto& sn = secondary->mesh().nodes;
            auto lo = std::upper_bound(sn.begin(), sn.end(), mesh.nodes[c]);
            auto hi = std::lower_bound(sn.begin(), sn.end(), mesh.nodes[c + 1]);
            inner.assign(lo, hi);
            extra = inner;
        }
        cell_points(mesh.nodes[c], mesh.nodes[c + 1], rule, resolve, pts, extra);
        for (const auto& p : pts) {
            out.x.push_back(p.x);
            out.w.push_back(p.w);
        }
    }
    return out;
}

/// Precomputed basis values of one space at a fixed list of points.
class SpaceTable {
public:
    SpaceTable(const FeSpace& space, std::span<const double> xs) : nb_(space.degree() + 1), n_(xs.size())
    {
        dofs_.resize(n_ * nb_);
        phi_.resize(n_ * nb_);
        dphi_.resize(n_ * nb_);
        for (std::size_t p = 0; p < n_; ++p) {
            const int cell = space.mesh().locate(xs[p]);
            const double x0 = space.mesh().nodes[cell];
            const double h = space.mesh().width(cell);
            space.shape((xs[p] - x0) / h, h, std::span(phi_).subspan(p * nb_, nb_), std::span(dphi_).subspan(p * nb_, nb_));
            for (int j = 0; j < nb_; ++j) {
                dofs_[p * nb_ + j] = space.dof(cell, j);
            }
        }
    }

    void evaluate(std::span<const double> coeffs, std::span<double> value, std::span<double> deriv) const
    {
        for (std::size_t p = 0; p < n_; ++p) {
            double v = 0.0;
            double d = 0.0;
            for (int j = 0; j < nb_; ++j) {
                const double c = coeffs[dofs_[p * nb_ + j]];
                v += c * phi_[p * nb_ + j];
                d += c * dphi_[p * nb_ + j];
            }
            value[p] = v;
            deriv[p] = d;
        }
    }

private:
    int nb_;
    std::size_t n_;
    std::vector<int> dofs_;
    std::vector<double> phi_;
    std::vector<double> dphi_;
};

} // namespace detail

struct SpatialErrors {
    double l2 = 0.0;     ///< |e|_beta
    double triple = 0.0; ///< (eps^2 |e'|_beta^2 + gamma |e|_beta^2)^(1/2)
    double linf = 0.0;   ///< max |e| over the quadrature points
};

/// Errors of a discrete field against an exact function, integrated with n_gauss points
/// per piece of a layer-resolving partition of every cell.
inline SpatialErrors field_errors(const DiscreteField& field, const std::function<double(double)>& exact,
                                  const std::function<double(double)>& exact_deriv, const Weight& weight, double epsilon,
                                  double gamma, int n_gauss = 0)
{
    const FeSpace& space = *field.space;
    const int ng = n_gauss > 0 ? n_gauss : space.degree() + 3;
    const auto pts = detail::error_points(space, nullptr, weight.epsilon(), weight.alpha(), ng);
    const detail::SpaceTable table(space, pts.x);
    std::vector<double> v(pts.x.size());
    std::vector<double> d(pts.x.size());
    table.evaluate(field.coefficients, v, d);
    double l2 = 0.0;
    double h1 = 0.0;
    SpatialErrors out;
    for (std::size_t p = 0; p < pts.x.size(); ++p) {
        const double x = pts.x[p];
        const double beta = weight(x);
        const double e = exact(x) - v[p];
        l2 += pts.w[p] * beta * e * e;
        if (exact_deriv) {
            const double ed = exact_deriv(x) - d[p];
            h1 += pts.w[p] * beta * ed * ed;
        }
        out.linf = std::max(out.linf, std::abs(e));
    }
    out.l2 = std::sqrt(l2);
    out.triple = std::sqrt(epsilon * epsilon * h1 + gamma * l2);
    return out;
}

inline double weighted_l2_error(const DiscreteField& field, const std::function<double(double)>& exact, const Weight& weight)
{
    return field_errors(field, exact, {}, weight, weight.epsilon(), 1.0).l2;
}

inline double triple_norm_error(const DiscreteField& field, const std::function<double(double)>& exact,
                                const std::function<double(double)>& exact_deriv, const Weight& weight, double epsilon,
                                double gamma)
{
    return field_errors(field, exact, exact_deriv, weight, epsilon, gamma).triple;
}

/// Errors between two discrete fields (possibly on different meshes and degrees).
inline SpatialErrors field_difference(const DiscreteField& coarse, const DiscreteField& fine, const Weight& weight,
                                      double epsilon, double gamma)
{
    const int ng = std::max(coarse.space->degree(), fine.space->degree()) + 2;
    const auto pts = detail::error_points(*coarse.space, fine.space.get(), weight.epsilon(), weight.alpha(), ng);
    const detail::SpaceTable tc(*coarse.space, pts.x);
    const detail::SpaceTable tf(*fine.space, pts.x);
    const std::size_t n = pts.x.size();
    std::vector<double> vc(n), dc(n), vf(n), df(n);
    tc.evaluate(coarse.coefficients, vc, dc);
    tf.evaluate(fine.coefficients, vf, df);
    double l2 = 0.0;
    double h1 = 0.0;
    SpatialErrors out;
    for (std::size_t p = 0; p < n; ++p) {
        const double beta = weight(pts.x[p]);
        const double e = vf[p] - vc[p];
        const double ed = df[p] - dc[p];
        l2 += pts.w[p] * beta * e * e;
        h1 += pts.w[p] * beta * ed * ed;
        out.linf = std::max(out.linf, std::abs(e));
    }
    out.l2 = std::sqrt(l2);
    out.triple = std::sqrt(epsilon * epsilon * h1 + gamma * l2);
    return out;
}

// ---------------------------------------------------------------------------
// Space-time error functionals

struct SpaceTimeErrors {
    double l2 = 0.0;       ///< |e|_{L2(0,T; L2_beta)}, (2q+1)-point Gauss in time on every slab
    double triple = 0.0;   ///< (int_0^T |||e(t)|||_beta^2 dt)^(1/2), same time rule
    double l2_q = 0.0;     ///< (sum_m Q_m |e(t)|_beta^2)^(1/2)
    double triple_q = 0.0; ///< (sum_m Q_m |||e(t)|||_beta^2)^(1/2)
    double sup_l2 = 0.0;   ///< max |e(t)|_beta over Radau times and slab starts (from the right)
};

/// Exact solution u(x, t) with its x-derivative.
struct ExactSolution {
    std::function<double(double, double)> value;
    std::function<double(double, double)> dx;
};

namespace detail {

/// Shared driver: `other(t, side, values, derivs)` fills the comparison values at the points.
/// The time integrals use the (2q+1)-point Gauss rule on every slab of `sol`.
template <typename Other>
SpaceTimeErrors spacetime_errors_impl(const SpaceTimeSolution& sol, const ErrorPoints& pts, const Weight& weight,
                                      Other&& other)
{
    const std::size_t n = pts.x.size();
    const SpaceTable table(*sol.space, pts.x);
    std::vector<double> beta(n);
    for (std::size_t p = 0; p < n; ++p) {
        beta[p] = weight(pts.x[p]);
    }
    std::vector<double> v(n), d(n), ov(n), od(n);
    auto norms = [&](double t, const std::vector<double>& coeffs, Side side) {
        table.evaluate(coeffs, v, d);
        other(t, side, ov, od);
        const double slope = sol.lift.slope(t);
        double l2 = 0.0;
        double h1 = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            const double e = ov[p] - (v[p] + sol.lift.value(pts.x[p], t));
            const double ed = od[p] - (d[p] + slope);
            l2 += pts.w[p] * beta[p] * e * e;
            h1 += pts.w[p] * beta[p] * ed * ed;
        }
        return std::pair{l2, h1};
    };
    SpaceTimeErrors out;
    double l2_sum = 0.0;
    double triple_sum = 0.0;
    double sup = 0.0;
    const double eps2 = sol.epsilon * sol.epsilon;
    for (int m = 0; m < sol.tmesh.slabs(); ++m) {
        const double half_tau = 0.5 * sol.tmesh.width(m);
        for (int i = 0; i <= sol.q; ++i) {
            const double t = sol.tmesh.map(m, sol.rule.nodes[i]);
            const auto [l2, h1] = norms(t, sol.stage(m, i), Side::left);
            l2_sum += half_tau * sol.rule.weights[i] * l2;
            triple_sum += half_tau * sol.rule.weights[i] * (eps2 * h1 + sol.gamma * l2);
            sup = std::max(sup, l2);
        }
        const double t0 = sol.tmesh.points[m];
        sup = std::max(sup, norms(t0, sol.coefficients_at(t0, Side::right), Side::right).first);
    }
    const QuadRule time_rule = gauss_rule(2 * sol.q + 1);
    double l2_int = 0.0;
    double triple_int = 0.0;
    for (int m = 0; m < sol.tmesh.slabs(); ++m) {
        const double half_tau = 0.5 * sol.tmesh.width(m);
        for (std::size_t g = 0; g < time_rule.nodes.size(); ++g) {
            const double t = sol.tmesh.map(m, time_rule.nodes[g]);
            const auto [l2, h1] = norms(t, sol.coefficients_at(t, Side::left), Side::left);
            l2_int += half_tau * time_rule.weights[g] * l2;
            triple_int += half_tau * time_rule.weights[g] * (eps2 * h1 + sol.gamma * l2);
        }
    }
    out.l2 = std::sqrt(l2_int);
    out.triple = std::sqrt(triple_int);
    out.l2_q = std::sqrt(l2_sum);
    out.triple_q = std::sqrt(triple_sum);
    out.sup_l2 = std::sqrt(sup);
    return out;
}

} // namespace detail

/// Errors of `sol` against an exact solution, measured with the solution's own weight.
inline SpaceTimeErrors spacetime_errors(const SpaceTimeSolution& sol, const ExactSolution& exact, int n_gauss = 0)
{
    const int ng = n_gauss > 0 ? n_gauss : sol.space->degree() + 3;
    const auto pts = detail::error_points(*sol.space, nullptr, sol.weight.epsilon(), sol.weight.alpha(), ng);
    return detail::spacetime_errors_impl(sol, pts, sol.weight,
                                         [&](double t, Side, std::vector<double>& v, std::vector<double>& d) {
                                             for (std::size_t p = 0; p < pts.x.size(); ++p) {
                                                 v[p] = exact.value(pts.x[p], t);
                                                 d[p] = exact.dx(pts.x[p], t);
                                             }
                                         });
}

/// Errors of `sol` against a (finer) reference solution, both evaluated at the time points of
/// `sol`; space is integrated over the common refinement of both meshes.
inline SpaceTimeErrors spacetime_errors(const SpaceTimeSolution& sol, const SpaceTimeSolution& ref)
{
    if (std::abs(sol.tmesh.points.back() - ref.tmesh.points.back()) > 1e-12 * sol.tmesh.points.back()) {
        throw InvalidConfig("spacetime_errors: solutions have different time horizons");
    }
    const int ng = std::max(sol.space->degree(), ref.space->degree()) + 2;
    const auto pts = detail::error_points(*sol.space, ref.space.get(), sol.weight.epsilon(), sol.weight.alpha(), ng);
    const detail::SpaceTable table(*ref.space, pts.x);
    return detail::spacetime_errors_impl(sol, pts, sol.weight,
                                         [&](double t, Side side, std::vector<double>& v, std::vector<double>& d) {
                                             table.evaluate(ref.coefficients_at(t, side), v, d);
                                             const double slope = ref.lift.slope(t);
                                             for (std::size_t p = 0; p < pts.x.size(); ++p) {
                                                 v[p] += ref.lift.value(pts.x[p], t);
                                                 d[p] += slope;
                                             }
                                         });
}

inline double q_triple_norm_error(const SpaceTimeSolution& sol, const SpaceTimeSolution& ref)
{
    return spacetime_errors(sol, ref).triple_q;
}

inline double q_triple_norm_error(const SpaceTimeSolution& sol, const ExactSolution& exact)
{
    return spacetime_errors(sol, exact).triple_q;
}

inline double sup_l2_error(const SpaceTimeSolution& sol, const SpaceTimeSolution& ref)
{
    return spacetime_errors(sol, ref).sup_l2;
}

inline double sup_l2_error(const SpaceTimeSolution& sol, const ExactSolution& exact)
{
    return spacetime_errors(sol, exact).sup_l2;
}

// ---------------------------------------------------------------------------
// Reference solutions

/// Mesh with every cell bisected; keeps the translation structure.
inline Mesh1D bisect_mesh(const Mesh1D& mesh)
{
    Mesh1D out = mesh;
    std::vector<double> left;
    for (int i = 0; i < mesh.half(); ++i) {
        left.push_back(mesh.nodes[i]);
        left.push_back(0.5 * (mesh.nodes[i] + mesh.nodes[i + 1]));
    }
    left.push_back(1.0);
    out.nodes = detail::translate_half(left);
    detail::finalize_mesh(out);
    return out;
}

inline TimeMesh bisect_time_mesh(const TimeMesh& tmesh)
{
    TimeMesh out;
    for (int m = 0; m < tmesh.slabs(); ++m) {
        out.points.push_back(tmesh.points[m]);
        out.points.push_back(0.5 * (tmesh.points[m] + tmesh.points[m + 1]));
    }
    out.points.push_back(tmesh.points.back());
    return out;
}

/// Mesh of the reference run: S-type meshes are rebuilt with 2N cells, the Duran mesh is bisected.
inline Mesh1D reference_mesh(const MeshConfig& cfg)
{
    if (cfg.family == MeshFamily::duran) {
        return bisect_mesh(build_mesh(cfg));
    }
    MeshConfig fine = cfg;
    fine.cells = 2 * cfg.cells;
    return build_mesh(fine);
}

/// Reference run: twice the cells and slabs, degrees k+1 and q+1.
inline SpaceTimeSolution build_reference(const ProblemSpec& spec, const MeshConfig& mesh_cfg, int k, int q,
                                         const TimeMesh& tmesh, WeightKind weight_kind, const DgOptions& opts = {})
{
    return dg_solve_on_space(spec, build_fespace(reference_mesh(mesh_cfg), k + 1), q + 1, bisect_time_mesh(tmesh),
                             weight_kind, opts);
}

// ---------------------------------------------------------------------------
// Manufactured and built-in problems

/// u(x, t) on [-1, 2] x [0, T] with the derivatives the strong form needs.
struct ManufacturedSolution {
    std::function<double(double, double)> u;
    std::function<double(double, double)> u_t;
    std::function<double(double, double)> u_x;
    std::function<double(double, double)> u_xx;
};

/// Data making `m.u` the exact solution: f = u_t - eps^2 u_xx + a u + b u(x-1, t),
/// phi = u on [-1, 0], psi = u(2, .), u0 = u(., 0).
inline ProblemSpec manufacture(const ManufacturedSolution& m, std::function<double(double, double)> a,
                               std::function<double(double, double)> b, double epsilon, double alpha, double gamma,
                               double t_end)
{
    ProblemSpec spec;
    spec.epsilon = epsilon;
    spec.alpha = alpha;
    spec.gamma = gamma;
    spec.T = t_end;
    spec.a = a;
    spec.b = b;
    const double eps2 = epsilon * epsilon;
    spec.f = [m, a, b, eps2](double x, double t) {
        return m.u_t(x, t) - eps2 * m.u_xx(x, t) + a(x, t) * m.u(x, t) + b(x, t) * m.u(x - 1.0, t);
    };
    spec.phi = m.u;
    spec.psi = [m](double t) { return m.u(2.0, t); };
    spec.u0 = [m](double x) { return m.u(x, 0.0); };
    spec.phi0_rate = [m](double t) { return m.u_t(0.0, t); };
    spec.psi_rate = [m](double t) { return m.u_t(2.0, t); };
    return spec;
}

inline ExactSolution exact_of(const ManufacturedSolution& m)
{
    return {m.u, m.u_x};
}

/// Smooth shift-active manufactured solution u = sin(pi x / 2) (1 + t) + t^2 x / 4.
inline ManufacturedSolution smooth_manufactured()
{
    constexpr double k = std::numbers::pi / 2.0;
    ManufacturedSolution m;
    m.u = [](double x, double t) { return std::sin(k * x) * (1.0 + t) + 0.25 * t * t * x; };
    m.u_t = [](double x, double t) { return std::sin(k * x) + 0.5 * t * x; };
    m.u_x = [](double x, double t) { return k * std::cos(k * x) * (1.0 + t) + 0.25 * t * t; };
    m.u_xx = [](double x, double t) { return -k * k * std::sin(k * x) * (1.0 + t); };
    return m;
}

enum class ProblemId { homogeneous, quadratic, ramp, manufactured_sin };

inline std::string_view to_string(ProblemId id)
{
    switch (id) {
    case ProblemId::homogeneous: return "homogeneous";
    case ProblemId::quadratic: return "quadratic";
    case ProblemId::ramp: return "ramp";
    case ProblemId::manufactured_sin: return "manufactured_sin";
    }
    return "unknown";
}

inline ProblemId parse_problem_id(std::string_view name)
{
    if (name == "homogeneous") return ProblemId::homogeneous;
    if (name == "quadratic") return ProblemId::quadratic;
    if (name == "ramp") return ProblemId::ramp;
    if (name == "manufactured_sin" || name == "manufactured") return ProblemId::manufactured_sin;
    throw InvalidConfig("unknown problem '" + std::string(name) + "'");
}

/// Default decay constant of the built-in example: a = 2 cosh(x - 1) >= 2 = alpha^2.
inline const double kExampleAlpha = std::numbers::sqrt2;

/// Built-in example: a = 2 cosh(x-1), b = -(1 + x^2/2), f = exp(x/2) (optionally times a
/// ramp in t), u0 = 0, u(2, t) = 0 and history phi = 0 or 3x^2.
inline ProblemSpec builtin_problem(ProblemId id, double epsilon, double t_end, double alpha = kExampleAlpha,
                                   double gamma = 1.0)
{
    if (id == ProblemId::manufactured_sin) {
        throw InvalidConfig("builtin_problem: manufactured_sin is not a built-in example");
    }
    ProblemSpec spec;
    spec.epsilon = epsilon;
    spec.alpha = alpha;
    spec.gamma = gamma;
    spec.T = t_end;
    spec.a = [](double x, double) { return 2.0 * std::cosh(x - 1.0); };
    spec.b = [](double x, double) { return -(1.0 + 0.5 * x * x); };
    if (id == ProblemId::ramp) {
        spec.f = [](double x, double t) {
            const double g = t < 0.5 ? t * t * (12.0 - 16.0 * t) : 1.0;
            return std::exp(0.5 * x) * g;
        };
    } else {
        spec.f = [](double x, double) { return std::exp(0.5 * x); };
    }
    if (id == ProblemId::quadratic) {
        spec.phi = [](double y, double) { return 3.0 * y * y; };
    } else {
        spec.phi = [](double, double) { return 0.0; };
    }
    spec.psi = [](double) { return 0.0; };
    spec.u0 = [](double) { return 0.0; };
    spec.phi0_rate = [](double) { return 0.0; };
    spec.psi_rate = [](double) { return 0.0; };
    return spec;
}

/// Problem for a given id: built-in example, or the smooth manufactured solution with
/// a = 2 + x, b = 1/2 (so alpha = sqrt 2, and alpha^2 - max|b| = 3/2 >= gamma).
inline ProblemSpec make_problem(ProblemId id, double epsilon, double t_end, double alpha, double gamma)
{
    if (id != ProblemId::manufactured_sin) {
        return builtin_problem(id, epsilon, t_end, alpha, gamma);
    }
    return manufacture(
        smooth_manufactured(), [](double x, double) { return 2.0 + x; }, [](double, double) { return 0.5; }, epsilon,
        alpha, gamma, t_end);
}

// ---------------------------------------------------------------------------
// Convergence studies

enum class StudyKind { interpolation, stationary, parabolic };

inline StudyKind parse_study_kind(std::string_view name)
{
    if (name == "interpolation") return StudyKind::interpolation;
    if (name == "stationary") return StudyKind::stationary;
    if (name == "parabolic") return StudyKind::parabolic;
    throw InvalidConfig("unknown study kind '" + std::string(name) + "'");
}

struct StudyConfig {
    StudyKind kind = StudyKind::parabolic;
    MeshFamily family = MeshFamily::shishkin;
    std::vector<int> cells{64, 128, 256, 512, 1024};
    std::vector<double> gradings{0.4, 0.2, 0.1, 0.05}; ///< Duran sweeps H instead of N
    int k = 1;
    int q = 0;
    double epsilon = 1e-4;
    double sigma = 0.0; ///< 0 means k + 1
    double alpha = kExampleAlpha;
    double gamma = 1.0;
    double T = 1.0;
    int slab_divisor = 4; ///< time slabs M = N / slab_divisor
    std::vector<WeightKind> weights{WeightKind::energy, WeightKind::balanced};
    ProblemId problem = ProblemId::homogeneous;
    LayerKind layer = LayerKind::left; ///< interpolation study
    int threads = 1;
};

struct ConvergenceRow {
    int cells = 0;
    double resolution = 0.0; ///< N for S-type meshes, H for the Duran mesh
    double tau = 0.0;
    std::vector<double> errors;
    std::vector<double> rates; ///< rate to the next row; NaN on the last row
    double g_l2 = 0.0;         ///< interpolation-theory bound for L2-type norms
    double g_e = 0.0;          ///< ... and for energy-type norms
    double g_l2_rate = std::numeric_limits<double>::quiet_NaN();
    double g_e_rate = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceReport {
    StudyConfig config;
    std::vector<std::string> columns;
    std::vector<ConvergenceRow> rows;
    std::vector<std::string> warnings;

    [[nodiscard]] int column(const std::string& name) const
    {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) {
            throw InvalidConfig("report has no column '" + name + "'");
        }
        return static_cast<int>(it - columns.begin());
    }
    [[nodiscard]] std::vector<double> errors(const std::string& name) const
    {
        const int c = column(name);
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r.errors[c]);
        return out;
    }
    [[nodiscard]] std::vector<double> rates(const std::string& name) const
    {
        const int c = column(name);
        std::vector<double> out;
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) out.push_back(rows[i].rates[c]);
        return out;
    }
};

/// Interpolation-theory bounds: S-type (h + N^-1 max|psi'|)^{k+1} and ^k; Duran
/// N^{-(k+1)} ln(1/eps)^{k+1} and N^{-k} ln(1/eps)^k.
inline std::pair<double, double> interpolation_bounds(const Mesh1D& mesh, int k, double epsilon)
{
    const double n = mesh.cells();
    if (mesh.family == MeshFamily::duran) {
        const double l = std::log(1.0 / epsilon);
        return {std::pow(l / n, k + 1), std::pow(l / n, k)};
    }
    const double base = mesh.h_layer_min + mesh.psi_prime_max.value() / n;
    return {std::pow(base, k + 1), std::pow(base, k)};
}

namespace detail {

inline std::string weight_suffix(WeightKind w) { return w == WeightKind::energy ? "e" : "b"; }

inline MeshConfig study_mesh(const StudyConfig& cfg, std::size_t row)
{
    MeshConfig m;
    m.family = cfg.family;
    m.epsilon = cfg.epsilon;
    m.alpha = cfg.alpha;
    m.sigma = cfg.sigma > 0.0 ? cfg.sigma : cfg.k + 1.0;
    if (cfg.family == MeshFamily::duran) {
        m.grading = cfg.gradings.at(row);
    } else {
        m.cells = cfg.cells.at(row);
    }
    return m;
}

inline ConvergenceRow run_study_row(const StudyConfig& cfg, std::size_t row)
{
    const MeshConfig mcfg = study_mesh(cfg, row);
    const Mesh1D mesh = build_mesh(mcfg);
    ConvergenceRow out;
    out.cells = mesh.cells();
    out.resolution = cfg.family == MeshFamily::duran ? mcfg.grading : mesh.cells();
    std::tie(out.g_l2, out.g_e) = interpolation_bounds(mesh, cfg.k, cfg.epsilon);

    switch (cfg.kind) {
    case StudyKind::interpolation: {
        const LayerTemplate w{cfg.layer, cfg.epsilon, cfg.alpha};
        const auto space = build_fespace(mesh, cfg.k);
        const DiscreteField iu = interpolate(space, [&](double x) { return w(x); });
        auto value = [&](double x) { return w(x); };
        auto deriv = [&](double x) { return w.derivative(x, 1); };
        const auto ee = field_errors(iu, value, deriv, Weight::energy(cfg.epsilon, cfg.alpha), cfg.epsilon, cfg.gamma);
        const auto eb = field_errors(iu, value, deriv, Weight::balanced(cfg.epsilon, cfg.alpha), cfg.epsilon, cfg.gamma);
        out.errors = {ee.linf, ee.l2, ee.triple, eb.l2, eb.triple};
        break;
    }
    case StudyKind::stationary: {
        const ProblemSpec spec = make_problem(cfg.problem, cfg.epsilon, cfg.T, cfg.alpha, cfg.gamma);
        const StationaryCoefficients coeffs = spec.frozen(cfg.T);
        const auto space = build_fespace(mesh, cfg.k);
        const auto ref_space = build_fespace(reference_mesh(mcfg), cfg.k + 1);
        for (WeightKind wk : cfg.weights) {
            const StationaryOptions opts{.quad_points = 0, .resolve_layers = false, .margin_max_size = 0};
            const StationaryResult res = solve_stationary_on_space(coeffs, space, wk, opts);
            const StationaryResult ref = solve_stationary_on_space(coeffs, ref_space, wk, opts);
            const Weight weight = make_weight(wk, cfg.epsilon, cfg.alpha);
            const SpatialErrors e = field_difference(res.field, ref.field, weight, cfg.epsilon, cfg.gamma);
            out.errors.push_back(e.l2);
            out.errors.push_back(e.triple);
        }
        break;
    }
    case StudyKind::parabolic: {
        const ProblemSpec spec = make_problem(cfg.problem, cfg.epsilon, cfg.T, cfg.alpha, cfg.gamma);
        if (mesh.cells() % cfg.slab_divisor != 0) {
            throw InvalidConfig("study: cell count not divisible by the slab divisor");
        }
        const TimeMesh tmesh = TimeMesh::uniform(cfg.T, mesh.cells() / cfg.slab_divisor);
        out.tau = tmesh.max_width();
        for (WeightKind wk : cfg.weights) {
            const SpaceTimeSolution sol = dg_solve(spec, mcfg, cfg.k, cfg.q, tmesh, wk);
            SpaceTimeErrors e;
            if (cfg.problem == ProblemId::manufactured_sin) {
                e = spacetime_errors(sol, exact_of(smooth_manufactured()));
            } else {
                e = spacetime_errors(sol, build_reference(spec, mcfg, cfg.k, cfg.q, tmesh, wk));
            }
            out.errors.push_back(e.l2);
            out.errors.push_back(e.triple);
            out.errors.push_back(e.sup_l2);
        }
        break;
    }
    }
    return out;
}

} // namespace detail

/// Observed rate between two rows: log2 ratio for doubled N, log ratio over log H ratio for Duran.
inline double observed_rate(double e_coarse, double e_fine, double res_coarse, double res_fine, MeshFamily family)
{
    if (!(e_coarse > 0.0) || !(e_fine > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (family == MeshFamily::duran) {
        return std::log(e_coarse / e_fine) / std::log(res_coarse / res_fine);
    }
    if (std::abs(res_fine - 2.0 * res_coarse) > 0.5) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::log2(e_coarse / e_fine);
}

inline ConvergenceReport convergence_study(const StudyConfig& cfg)
{
    if (cfg.k < 1 || cfg.q < 0) {
        throw InvalidConfig("study: need k >= 1 and q >= 0");
    }
    ConvergenceReport report;
    report.config = cfg;
    switch (cfg.kind) {
    case StudyKind::interpolation:
        report.columns = {"linf", "l2_e", "triple_e", "l2_b", "triple_b"};
        break;
    case StudyKind::stationary:
        for (WeightKind w : cfg.weights) {
            report.columns.push_back("l2_" + detail::weight_suffix(w));
            report.columns.push_back("triple_" + detail::weight_suffix(w));
        }
        break;
    case StudyKind::parabolic:
        for (WeightKind w : cfg.weights) {
            report.columns.push_back("l2_" + detail::weight_suffix(w));
            report.columns.push_back("triple_" + detail::weight_suffix(w));
            report.columns.push_back("sup_l2_" + detail::weight_suffix(w));
        }
        break;
    }
    const std::size_t n_rows = cfg.family == MeshFamily::duran ? cfg.gradings.size() : cfg.cells.size();
    report.rows.resize(n_rows);
    if (cfg.threads > 1) {
        std::vector<std::future<ConvergenceRow>> jobs;
        for (std::size_t r = 0; r < n_rows; ++r) {
            jobs.push_back(std::async(std::launch::async, [&cfg, r] { return detail::run_study_row(cfg, r); }));
        }
        for (std::size_t r = 0; r < n_rows; ++r) {
            report.rows[r] = jobs[r].get();
        }
    } else {
        for (std::size_t r = 0; r < n_rows; ++r) {
            report.rows[r] = detail::run_study_row(cfg, r);
        }
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
        auto& row = report.rows[r];
        row.rates.assign(report.columns.size(), std::numeric_limits<double>::quiet_NaN());
        if (r + 1 < n_rows) {
            const auto& next = report.rows[r + 1];
            for (std::size_t c = 0; c < report.columns.size(); ++c) {
                row.rates[c] = observed_rate(row.errors[c], next.errors[c], row.resolution, next.resolution, cfg.family);
            }
            const double rc = cfg.family == MeshFamily::duran ? row.cells : row.resolution;
            const double rf = cfg.family == MeshFamily::duran ? next.cells : next.resolution;
            if (cfg.family == MeshFamily::duran) {
                row.g_l2_rate = std::log(row.g_l2 / next.g_l2) / std::log(row.resolution / next.resolution);
                row.g_e_rate = std::log(row.g_e / next.g_e) / std::log(row.resolution / next.resolution);
            } else {
                row.g_l2_rate = observed_rate(row.g_l2, next.g_l2, rc, rf, cfg.family);
                row.g_e_rate = observed_rate(row.g_e, next.g_e, rc, rf, cfg.family);
            }
        }
    }
    return report;
}

inline void write_report_csv(std::ostream& os, const ConvergenceReport& report)
{
    os << "N,resolution,tau";
    for (const auto& c : report.columns) {
        os << ',' << c << ',' << c << "_rate";
    }
    os << ",g_l2,g_e\n";
    char buf[64];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%d,%.10e,%.10e", row.cells, row.resolution, row.tau);
        os << buf;
        for (std::size_t c = 0; c < report.columns.size(); ++c) {
            std::snprintf(buf, sizeof buf, ",%.10e,%.6f", row.errors[c], row.rates[c]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.10e,%.10e\n", row.g_l2, row.g_e);
        os << buf;
    }
}

/// Aligned text table: N followed by (error, rate) pairs of the selected columns.
inline void write_report_table(std::ostream& os, const ConvergenceReport& report, const std::vector<std::string>& columns = {})
{
    const std::vector<std::string>& cols = columns.empty() ? report.columns : columns;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%8s", report.config.family == MeshFamily::duran ? "N(H)" : "N");
    os << buf;
    for (const auto& c : cols) {
        std::snprintf(buf, sizeof buf, " %12s %6s", c.c_str(), "rate");
        os << buf;
    }
    os << '\n';
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%8d", row.cells);
        os << buf;
        for (const auto& c : cols) {
            const int i = report.column(c);
            if (std::isnan(row.rates[i])) {
                std::snprintf(buf, sizeof buf, " %12.2e %6s", row.errors[i], "");
            } else {
                std::snprintf(buf, sizeof buf, " %12.2e %6.2f", row.errors[i], row.rates[i]);
            }
            os << buf;
        }
        os << '\n';
    }
}

} // namespace shiftdg
