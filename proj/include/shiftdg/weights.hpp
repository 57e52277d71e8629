#pragma once

#include "errors.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace shiftdg {

enum class WeightKind { energy, balanced, custom };

inline std::string_view to_string(WeightKind kind)
{
    switch (kind) {
    case WeightKind::energy: return "energy";
    case WeightKind::balanced: return "balanced";
    case WeightKind::custom: return "custom";
    }
    return "unknown";
}

inline WeightKind parse_weight_kind(std::string_view name)
{
    if (name == "energy" || name == "e") return WeightKind::energy;
    if (name == "balanced" || name == "b") return WeightKind::balanced;
    throw InvalidConfig("unknown weight kind '" + std::string(name) + "'");
}

/// Weight function beta on [0, 2] used in the scalar products <u, v>_beta.
///
/// The energy weight is beta = 1. The balanced weight is
///   beta(x) = 1 + (exp(-a x/e) + exp(-a|x-1|/e) + exp(-a(2-x)/e)) / e
/// with its derivative taken from the left at the kink x = 1.
/// Custom weights carry their own callables and are used for testing the admissibility check.
class Weight {
public:
    Weight() = default;

    static Weight energy(double epsilon, double alpha)
    {
        Weight w;
        w.kind_ = WeightKind::energy;
        w.epsilon_ = epsilon;
        w.alpha_ = alpha;
        return w;
    }

    static Weight balanced(double epsilon, double alpha)
    {
        Weight w;
        w.kind_ = WeightKind::balanced;
        w.epsilon_ = epsilon;
        w.alpha_ = alpha;
        w.layer_points_ = {0.0, 1.0, 2.0};
        return w;
    }

    static Weight custom(std::function<double(double)> value, std::function<double(double)> derivative,
                         double epsilon, double alpha, std::vector<double> layer_points)
    {
        Weight w;
        w.kind_ = WeightKind::custom;
        w.epsilon_ = epsilon;
        w.alpha_ = alpha;
        w.value_ = std::move(value);
        w.derivative_ = std::move(derivative);
        w.layer_points_ = std::move(layer_points);
        return w;
    }

    [[nodiscard]] WeightKind kind() const { return kind_; }
    [[nodiscard]] double epsilon() const { return epsilon_; }
    [[nodiscard]] double alpha() const { return alpha_; }

    /// Points around which the weight varies on the epsilon scale.
    [[nodiscard]] const std::vector<double>& layer_points() const { return layer_points_; }

    [[nodiscard]] double operator()(double x) const
    {
        switch (kind_) {
        case WeightKind::energy: return 1.0;
        case WeightKind::balanced: {
            const double r = alpha_ / epsilon_;
            return 1.0 + (std::exp(-r * x) + std::exp(-r * std::abs(x - 1.0)) + std::exp(-r * (2.0 - x))) / epsilon_;
        }
        case WeightKind::custom: return value_(x);
        }
        return 1.0;
    }

    [[nodiscard]] double derivative(double x) const
    {
        switch (kind_) {
        case WeightKind::energy: return 0.0;
        case WeightKind::balanced: {
            const double r = alpha_ / epsilon_;
            const double sign = x > 1.0 ? -1.0 : 1.0; // d/dx exp(-r|x-1|), left limit at x = 1
            return r / epsilon_ * (-std::exp(-r * x) + sign * std::exp(-r * std::abs(x - 1.0)) + std::exp(-r * (2.0 - x)));
        }
        case WeightKind::custom: return derivative_(x);
        }
        return 0.0;
    }

private:
    WeightKind kind_ = WeightKind::energy;
    double epsilon_ = 1.0;
    double alpha_ = 1.0;
    std::function<double(double)> value_;
    std::function<double(double)> derivative_;
    std::vector<double> layer_points_;
};

inline Weight make_weight(WeightKind kind, double epsilon, double alpha)
{
    if (!(epsilon > 0.0) || epsilon > 1.0) {
        throw InvalidConfig("make_weight: epsilon must lie in (0, 1]");
    }
    if (!(alpha > 0.0)) {
        throw InvalidConfig("make_weight: alpha must be positive");
    }
    switch (kind) {
    case WeightKind::energy: return Weight::energy(epsilon, alpha);
    case WeightKind::balanced: return Weight::balanced(epsilon, alpha);
    case WeightKind::custom: break;
    }
    throw InvalidConfig("make_weight: custom weights are built with Weight::custom");
}

/// Breakpoints splitting [left, right] so that each piece resolves the exponential
/// layers of the weight: within 60 eps/alpha of a layer point, pieces are at most
/// eps/(2 alpha) wide. For the energy weight this is just {left, right}.
inline std::vector<double> weight_breakpoints(double left, double right, const Weight& w)
{
    std::vector<double> points{left, right};
    if (w.layer_points().empty()) {
        return points;
    }
    const double step = 0.5 * w.epsilon() / w.alpha();
    constexpr int reach = 120;
    for (double p : w.layer_points()) {
        const double lo = std::max(left, p - reach * step);
        const double hi = std::min(right, p + reach * step);
        if (lo >= hi) {
            continue;
        }
        const int j_first = static_cast<int>(std::floor((lo - p) / step));
        const int j_last = static_cast<int>(std::ceil((hi - p) / step));
        for (int j = std::max(j_first, -reach); j <= std::min(j_last, reach); ++j) {
            const double x = p + j * step;
            if (x > left && x < right) {
                points.push_back(x);
            }
        }
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

struct WeightValidation {
    double min_value = 0.0;       ///< min sampled beta
    double max_ratio = 0.0;       ///< max sampled |beta'| / ((alpha/eps) beta)
    double integral = 0.0;        ///< integral of beta over (0, 2)
    bool passed = false;
};

/// Sample the admissibility conditions beta >= 1, |beta'| <= (alpha/eps) beta and a bounded
/// integral. Samples: n_samples uniform points plus the layer-resolving breakpoints.
inline WeightValidation validate_weight(const Weight& w, int n_samples)
{
    if (n_samples < 2) {
        throw InvalidConfig("validate_weight: need at least 2 samples");
    }
    std::vector<double> xs;
    xs.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        xs.push_back(2.0 * i / (n_samples - 1));
    }
    const std::vector<double> pieces = weight_breakpoints(0.0, 2.0, w);
    // layer pieces are refined further to width eps/4
    const double fine = 0.25 * w.epsilon();
    const double layer_piece = 0.5 * w.epsilon() / w.alpha() * (1.0 + 1e-9);
    std::vector<double> breaks;
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
        const double a = pieces[i];
        const double b = pieces[i + 1];
        const int sub = (b - a) <= layer_piece ? std::max(1, static_cast<int>(std::ceil((b - a) / fine))) : 1;
        for (int s = 0; s < sub; ++s) {
            breaks.push_back(a + (b - a) * s / sub);
        }
    }
    breaks.push_back(2.0);
    xs.insert(xs.end(), breaks.begin(), breaks.end());

    WeightValidation report;
    report.min_value = std::numeric_limits<double>::infinity();
    const double rate = w.alpha() / w.epsilon();
    for (double x : xs) {
        const double v = w(x);
        report.min_value = std::min(report.min_value, v);
        report.max_ratio = std::max(report.max_ratio, std::abs(w.derivative(x)) / (rate * v));
    }

    const QuadRule rule = gauss_rule(8);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double a = breaks[i];
        const double b = breaks[i + 1];
        if (b <= a) {
            continue;
        }
        for (std::size_t p = 0; p < rule.size(); ++p) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[p];
            report.integral += 0.5 * (b - a) * rule.weights[p] * w(x);
        }
    }
    report.passed = report.min_value >= 1.0 - 1e-12 && report.max_ratio <= 1.0 + 1e-12 && report.integral <= 10.0;
    return report;
}

} // namespace shiftdg
