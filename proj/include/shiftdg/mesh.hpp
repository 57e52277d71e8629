#pragma once

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace shiftdg {

enum class MeshFamily { shishkin, bakhvalov_s, duran };

inline std::string_view to_string(MeshFamily family)
{
    switch (family) {
    case MeshFamily::shishkin: return "shishkin";
    case MeshFamily::bakhvalov_s: return "bakhvalov_s";
    case MeshFamily::duran: return "duran";
    }
    return "unknown";
}

inline MeshFamily parse_mesh_family(std::string_view name)
{
    if (name == "shishkin") return MeshFamily::shishkin;
    if (name == "bakhvalov_s" || name == "bakhvalov-s" || name == "bakhvalov") return MeshFamily::bakhvalov_s;
    if (name == "duran") return MeshFamily::duran;
    throw InvalidConfig("unknown mesh family '" + std::string(name) + "'");
}

/// Parameters of a layer-adapted mesh on (0, 2).
/// S-type meshes use `cells`; the Duran mesh uses `grading` (H) and derives its cell count.
struct MeshConfig {
    MeshFamily family = MeshFamily::shishkin;
    int cells = 64;
    double grading = 0.5;
    double sigma = 2.0;
    double alpha = 1.0;
    double epsilon = 1e-2;
};

/// Ordered nodes on [0, 2] with x_{i + N/2} = 1 + x_i and a node at exactly x = 1.
struct Mesh1D {
    std::vector<double> nodes;
    MeshFamily family = MeshFamily::shishkin;
    std::optional<double> lambda;        ///< S-type transition point
    double h_layer_min = 0.0;            ///< smallest cell width
    std::optional<double> psi_prime_max; ///< max|psi'| of the S-type mesh-characterising function
    std::optional<int> duran_m;          ///< Duran M before any omission
    bool duran_omitted = false;          ///< Duran: x_{M-1} dropped

    [[nodiscard]] int cells() const { return static_cast<int>(nodes.size()) - 1; }
    [[nodiscard]] int half() const { return cells() / 2; }
    [[nodiscard]] double width(int cell) const { return nodes[cell + 1] - nodes[cell]; }

    /// Cell containing x; interior nodes belong to the cell on their left.
    [[nodiscard]] int locate(double x) const
    {
        if (x < nodes.front() || x > nodes.back() || std::isnan(x)) {
            throw DomainError("Mesh1D::locate: x outside [0, 2]");
        }
        const auto it = std::lower_bound(nodes.begin() + 1, nodes.end(), x);
        return std::min(static_cast<int>(it - nodes.begin()) - 1, cells() - 1);
    }
};

namespace detail {

inline void finalize_mesh(Mesh1D& mesh)
{
    const int n = mesh.cells();
    double hmin = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n; ++c) {
        const double h = mesh.width(c);
        if (!(h > 0.0)) {
            throw std::logic_error("mesh nodes are not strictly increasing");
        }
        hmin = std::min(hmin, h);
    }
    mesh.h_layer_min = hmin;
}

/// Copy the nodes of [0, 1] onto [1, 2] by translation.
inline std::vector<double> translate_half(const std::vector<double>& left)
{
    const std::size_t half = left.size() - 1;
    std::vector<double> nodes(2 * half + 1);
    for (std::size_t i = 0; i <= half; ++i) {
        nodes[i] = left[i];
    }
    nodes[half] = 1.0;
    for (std::size_t i = 1; i <= half; ++i) {
        nodes[half + i] = 1.0 + nodes[i];
    }
    return nodes;
}

} // namespace detail

/// Shishkin or Bakhvalov-S mesh. The transition point is capped at 1/4, in which
/// case the layer branch is rescaled so that x_{N/8} = lambda still holds.
inline Mesh1D build_stype_mesh(const MeshConfig& cfg)
{
    if (cfg.family == MeshFamily::duran) {
        throw InvalidConfig("build_stype_mesh: family must be shishkin or bakhvalov_s");
    }
    const int n = cfg.cells;
    if (n < 8 || n % 8 != 0) {
        throw InvalidConfig("S-type mesh: cell count must be a positive multiple of 8, got " + std::to_string(n));
    }
    if (!(cfg.sigma > 0.0) || !(cfg.alpha > 0.0)) {
        throw InvalidConfig("S-type mesh: sigma and alpha must be positive");
    }
    if (!(cfg.epsilon > 0.0) || cfg.epsilon > 1.0) {
        throw InvalidConfig("S-type mesh: epsilon must lie in (0, 1]");
    }
    const double log_n = std::log(static_cast<double>(n));
    const double lambda = std::min(0.25, cfg.sigma * cfg.epsilon * log_n / cfg.alpha);
    const bool capped = lambda < cfg.sigma * cfg.epsilon * log_n / cfg.alpha;

    // phi(0) = 0, phi(1/2) = ln N; scale = sigma*eps/alpha unless capped
    auto phi = [&](double t) {
        if (cfg.family == MeshFamily::shishkin) {
            return 2.0 * t * log_n;
        }
        return -std::log(1.0 - 2.0 * t * (1.0 - 1.0 / n));
    };
    const double scale = capped ? lambda / log_n : cfg.sigma * cfg.epsilon / cfg.alpha;

    const int n8 = n / 8;
    const int n2 = n / 2;
    std::vector<double> left(n2 + 1);
    for (int i = 0; i <= n2; ++i) {
        if (i == 0) {
            left[i] = 0.0;
        } else if (i < n8) {
            left[i] = scale * phi(4.0 * i / n);
        } else if (i == n8) {
            left[i] = lambda;
        } else if (i < 3 * n8) {
            left[i] = (4.0 * i / n) * (1.0 - 2.0 * lambda) + 2.0 * lambda - 0.5;
        } else if (i == 3 * n8) {
            left[i] = 1.0 - lambda;
        } else if (i < n2) {
            left[i] = 1.0 - scale * phi(2.0 - 4.0 * i / n);
        } else {
            left[i] = 1.0;
        }
    }

    Mesh1D mesh;
    mesh.family = cfg.family;
    mesh.nodes = detail::translate_half(left);
    mesh.lambda = lambda;
    mesh.psi_prime_max = cfg.family == MeshFamily::shishkin ? 2.0 * log_n : 2.0;
    detail::finalize_mesh(mesh);
    return mesh;
}

/// Number of geometric steps of the Duran mesh: the smallest M with
/// H*eps*(1+H)^(M-2) < 1/2 <= H*eps*(1+H)^(M-1).
inline int duran_step_count(double grading, double epsilon)
{
    const double h1 = grading * epsilon;
    int m = static_cast<int>(std::ceil(1.0 - std::log(2.0 * h1) / std::log1p(grading)));
    // the closed form can be off by one at exact powers; settle it on the recursion itself
    auto power = [&](int e) { return h1 * std::pow(1.0 + grading, e); };
    while (m > 2 && power(m - 2) >= 0.5) --m;
    while (power(m - 1) < 0.5) ++m;
    return m;
}

/// Recursively graded mesh: x_1 = H eps, x_i = (1+H) x_{i-1}, mirrored about 1/2
/// and translated onto [1, 2]. x_{M-1} is dropped when 1/2 - x_{M-1} < (x_{M-1} - x_{M-2}) / 2.
inline Mesh1D build_duran_mesh(double grading, double epsilon)
{
    if (!(grading > 0.0) || !(grading < 1.0)) {
        throw InvalidConfig("Duran mesh: H must lie in (0, 1)");
    }
    if (!(epsilon > 0.0) || epsilon > 1.0) {
        throw InvalidConfig("Duran mesh: epsilon must lie in (0, 1]");
    }
    if (!(grading * epsilon < 0.5)) {
        throw InvalidConfig("Duran mesh: H*epsilon must be below 1/2");
    }
    const int m = duran_step_count(grading, epsilon);
    if (m < 2) {
        throw InvalidConfig("Duran mesh: M must be at least 2");
    }

    // graded points x_0..x_{M-1} on [0, 1/2)
    std::vector<double> graded(m);
    graded[0] = 0.0;
    graded[1] = grading * epsilon;
    for (int i = 2; i <= m - 1; ++i) {
        graded[i] = (1.0 + grading) * graded[i - 1];
    }
    bool omit = false;
    if (m >= 3) {
        const double last = graded[m - 1];
        omit = (0.5 - last) < 0.5 * (last - graded[m - 2]);
    }
    if (omit) {
        graded.pop_back();
    }

    std::vector<double> unit(graded);
    unit.push_back(0.5);
    for (auto it = graded.rbegin(); it != graded.rend(); ++it) {
        unit.push_back(*it == 0.0 ? 1.0 : 1.0 - *it);
    }

    Mesh1D mesh;
    mesh.family = MeshFamily::duran;
    mesh.nodes = detail::translate_half(unit);
    mesh.duran_m = m;
    mesh.duran_omitted = omit;
    detail::finalize_mesh(mesh);
    return mesh;
}

inline Mesh1D build_mesh(const MeshConfig& cfg)
{
    if (cfg.family == MeshFamily::duran) {
        return build_duran_mesh(cfg.grading, cfg.epsilon);
    }
    return build_stype_mesh(cfg);
}

/// CSV dump: header `i,x_i`, one row per node.
inline void write_mesh_csv(std::ostream& os, const Mesh1D& mesh)
{
    os << "i,x_i\n";
    char buf[64];
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.16e\n", i, mesh.nodes[i]);
        os << buf;
    }
}

} // namespace shiftdg
