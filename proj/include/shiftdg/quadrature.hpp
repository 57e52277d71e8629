#pragma once

#include "errors.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace shiftdg {

/// Quadrature rule on the reference interval [-1, 1].
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    int exactness = 0; ///< highest polynomial degree integrated exactly

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// Right Gauss-Radau rule on [-1, 1] with q+1 nodes, the last one at +1.
struct TimeQuadRule {
    int q = 0;
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

namespace detail {

/// P_n(t) and P_n'(t) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double t)
{
    if (n == 0) {
        return {1.0, 0.0};
    }
    double p_prev = 1.0;
    double p = t;
    for (int j = 2; j <= n; ++j) {
        const double p_next = ((2.0 * j - 1.0) * t * p - (j - 1.0) * p_prev) / j;
        p_prev = p;
        p = p_next;
    }
    // derivative from (1 - t^2) P_n' = n (P_{n-1} - t P_n), valid off the endpoints
    double dp;
    if (std::abs(1.0 - t * t) > 1e-14) {
        dp = n * (p_prev - t * p) / (1.0 - t * t);
    } else {
        dp = (t > 0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0)) * 0.5 * n * (n + 1.0);
    }
    return {p, dp};
}

} // namespace detail

/// n-point Gauss-Legendre rule, exact for degree 2n-1.
inline QuadRule gauss_rule(int n)
{
    if (n < 1 || n > 32) {
        throw InvalidConfig("gauss_rule: number of points must lie in [1, 32], got " + std::to_string(n));
    }
    QuadRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    rule.exactness = 2 * n - 1;
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = detail::legendre(n, t);
            const double dt = p / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) {
                break;
            }
        }
        const double dp = detail::legendre(n, t).second;
        const double w = 2.0 / ((1.0 - t * t) * dp * dp);
        rule.nodes[i] = -t;
        rule.nodes[n - 1 - i] = t;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

/// Values of the Lagrange polynomials through `nodes` at t.
inline void lagrange_values(std::span<const double> nodes, double t, std::span<double> out)
{
    const std::size_t n = nodes.size();
    for (std::size_t j = 0; j < n; ++j) {
        double v = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i != j) {
                v *= (t - nodes[i]) / (nodes[j] - nodes[i]);
            }
        }
        out[j] = v;
    }
}

/// Derivatives of the Lagrange polynomials through `nodes` at t.
inline void lagrange_derivatives(std::span<const double> nodes, double t, std::span<double> out)
{
    const std::size_t n = nodes.size();
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            if (l == j) {
                continue;
            }
            double term = 1.0 / (nodes[j] - nodes[l]);
            for (std::size_t i = 0; i < n; ++i) {
                if (i != j && i != l) {
                    term *= (t - nodes[i]) / (nodes[j] - nodes[i]);
                }
            }
            sum += term;
        }
        out[j] = sum;
    }
}

/// (q+1)-point right Gauss-Radau rule: nodes are the roots of P_{q+1} - P_q,
/// which include t = 1. Exact for degree 2q.
inline TimeQuadRule radau_rule(int q)
{
    if (q < 0 || q > 6) {
        throw InvalidConfig("radau_rule: q must lie in [0, 6], got " + std::to_string(q));
    }
    const int n = q + 1;
    TimeQuadRule rule;
    rule.q = q;
    auto g = [n](double t) {
        return detail::legendre(n, t).first - detail::legendre(n - 1, t).first;
    };
    // interior roots in [-1, 1): bracket on a fine grid, then bisect
    constexpr int samples = 4000;
    double t_left = -1.0;
    double g_left = g(t_left);
    for (int s = 1; s <= samples && static_cast<int>(rule.nodes.size()) < q; ++s) {
        const double t_right = -1.0 + 2.0 * s / samples;
        const double g_right = g(t_right);
        if (t_right < 1.0 && g_left * g_right <= 0.0) {
            double lo = t_left;
            double hi = t_right;
            for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (g(lo) * g(mid) <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            rule.nodes.push_back(0.5 * (lo + hi));
        }
        t_left = t_right;
        g_left = g_right;
    }
    if (static_cast<int>(rule.nodes.size()) != q) {
        throw NumericalError("radau_rule: failed to bracket all interior nodes");
    }
    rule.nodes.push_back(1.0);

    // weights = integrals of the Lagrange basis, computed with an exact Gauss rule
    const QuadRule gauss = gauss_rule(n + 1);
    rule.weights.assign(n, 0.0);
    std::vector<double> values(n);
    for (std::size_t p = 0; p < gauss.size(); ++p) {
        lagrange_values(rule.nodes, gauss.nodes[p], values);
        for (int j = 0; j < n; ++j) {
            rule.weights[j] += gauss.weights[p] * values[j];
        }
    }
    return rule;
}

} // namespace shiftdg
