// Acceptance harness: one PASS/FAIL line per criterion. Exit status is 0 unless --strict
// is given, in which case any FAIL exits 1.

#include <shiftdg/analysis.hpp>
#include <shiftdg/assembly.hpp>
#include <shiftdg/linsolve.hpp>
#include <shiftdg/mesh.hpp>
#include <shiftdg/quadrature.hpp>
#include <shiftdg/stationary.hpp>
#include <shiftdg/timedg.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace shiftdg;

namespace {

// tolerances
constexpr double kRateLow1 = 0.90;
constexpr double kRateHigh1 = 1.05;
constexpr double kTripleBLow1 = 0.94;
constexpr double kTripleBHigh1 = 1.06;
constexpr double kMagnitudeFactor = 1.3;
constexpr double kRateLow2 = 1.9;
constexpr double kRateHigh2 = 2.05;
constexpr double kRuntimeLimit = 300.0; // seconds
constexpr double kRobustValue = 3.30e-5;
constexpr double kMarginFloor = -1e-10;
constexpr double kQuadratureTol = 1e-13;
constexpr double kSpaceOrderSlack = 0.1;
constexpr double kTimeOrderSlack = 0.1;
constexpr double kInterpolationRateTol = 0.15;
constexpr int kMeshSweep = 150;
constexpr double kEquivalenceTol = 1e-12;

// reference errors of the homogeneous example, k = 1, q = 0, N = 64..1024
const std::vector<double> kRefL2e{2.89e-02, 1.49e-02, 7.59e-03, 3.83e-03, 1.92e-03};
const std::vector<double> kRefTriplee{2.89e-02, 1.50e-02, 7.60e-03, 3.83e-03, 1.92e-03};
const std::vector<double> kRefL2b{4.00e-02, 2.06e-02, 1.05e-02, 5.27e-03, 2.65e-03};
const std::vector<double> kRefTripleb{1.32e-01, 6.65e-02, 3.31e-02, 1.65e-02, 8.20e-03};

struct Verdict {
    bool pass = true;
    std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& name, const Verdict& v)
{
    std::printf("criterion %2d %s  %s: %s\n", id, v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) {
        ++g_failures;
    }
}

void note(int id, const std::string& text)
{
    std::printf("    note %2d: %s\n", id, text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string list(const std::vector<double>& v, const char* f = "%.2f")
{
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? ", " : "") + fmt(f, v[i]);
    }
    return s + "}";
}

bool all_within(const std::vector<double>& v, double lo, double hi)
{
    return std::all_of(v.begin(), v.end(), [&](double r) { return r >= lo && r <= hi; });
}

int threads()
{
    return std::max(1, static_cast<int>(std::min(5u, std::thread::hardware_concurrency())));
}

ConvergenceReport table_study(MeshFamily family, ProblemId problem, int k, int q, double sigma)
{
    StudyConfig cfg;
    cfg.kind = StudyKind::parabolic;
    cfg.family = family;
    cfg.k = k;
    cfg.q = q;
    cfg.sigma = sigma;
    cfg.epsilon = 1e-4;
    cfg.problem = problem;
    cfg.threads = threads();
    return convergence_study(cfg);
}

double worst_factor(const std::vector<double>& got, const std::vector<double>& ref)
{
    double w = 1.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        w = std::max({w, got[i] / ref[i], ref[i] / got[i]});
    }
    return w;
}

/// First-order pattern: rate windows for every column; magnitudes against the reference when given.
Verdict first_order_pattern(const ConvergenceReport& r, bool with_magnitudes, double seconds)
{
    Verdict v;
    std::ostringstream d;
    for (const char* c : {"l2_e", "triple_e", "l2_b"}) {
        const auto rates = r.rates(c);
        const bool ok = all_within(rates, kRateLow1, kRateHigh1);
        v.pass = v.pass && ok;
        d << c << " rates " << list(rates) << (ok ? "" : " out of window") << "; ";
    }
    const auto tb = r.rates("triple_b");
    const bool tb_ok = all_within(tb, kTripleBLow1, kTripleBHigh1);
    v.pass = v.pass && tb_ok;
    d << "triple_b rates " << list(tb) << (tb_ok ? "" : " out of window");
    if (with_magnitudes) {
        const double f = std::max({worst_factor(r.errors("l2_e"), kRefL2e), worst_factor(r.errors("triple_e"), kRefTriplee),
                                   worst_factor(r.errors("l2_b"), kRefL2b), worst_factor(r.errors("triple_b"), kRefTripleb)});
        const bool ok = f <= kMagnitudeFactor;
        v.pass = v.pass && ok;
        d << "; worst magnitude factor " << fmt("%.3f", f) << (ok ? "" : " > 1.3");
    }
    if (seconds >= 0.0) {
        const bool ok = seconds <= kRuntimeLimit;
        v.pass = v.pass && ok;
        d << "; runtime " << fmt("%.1f", seconds) << " s";
    }
    v.detail = d.str();
    return v;
}

/// Second-order pattern: energy-weight rates in the window, balanced triple rates strictly
/// decreasing over the last three refinements.
Verdict second_order_pattern(const ConvergenceReport& r)
{
    Verdict v;
    std::ostringstream d;
    for (const char* c : {"l2_e", "triple_e"}) {
        const auto rates = r.rates(c);
        const bool ok = all_within(rates, kRateLow2, kRateHigh2);
        v.pass = v.pass && ok;
        d << c << " rates " << list(rates) << (ok ? "" : " out of window") << "; ";
    }
    const auto tb = r.rates("triple_b");
    bool decreasing = tb.size() >= 3;
    for (std::size_t i = tb.size() - 2; decreasing && i < tb.size(); ++i) {
        decreasing = tb[i] < tb[i - 1];
    }
    v.pass = v.pass && decreasing;
    d << "triple_b rates " << list(tb) << (decreasing ? " decreasing" : " not strictly decreasing");
    v.detail = d.str();
    return v;
}

double since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct StudyOutcome {
    Verdict verdict;
    std::string supplementary;
};

StudyOutcome rates_k1(ProblemId problem, bool magnitudes)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto shishkin = table_study(MeshFamily::shishkin, problem, 1, 0, 2.0);
    const double seconds = since(t0);
    StudyOutcome out{first_order_pattern(shishkin, magnitudes, magnitudes ? seconds : -1.0), ""};
    const Verdict bs = first_order_pattern(table_study(MeshFamily::bakhvalov_s, problem, 1, 0, 2.0), magnitudes, -1.0);
    out.supplementary = std::string("k=1 on Bakhvalov-S: ") + (bs.pass ? "within all windows" : "outside windows") + "; " + bs.detail;
    return out;
}

StudyOutcome rates_k2(ProblemId problem)
{
    StudyOutcome out{second_order_pattern(table_study(MeshFamily::shishkin, problem, 2, 1, 0.0)), ""};
    const Verdict bs = second_order_pattern(table_study(MeshFamily::bakhvalov_s, problem, 2, 1, 0.0));
    out.supplementary = std::string("k=2 on Bakhvalov-S: ") + (bs.pass ? "within all windows" : "outside windows") + "; " + bs.detail;
    return out;
}

void criterion_first_order(int id)
{
    const StudyOutcome o = rates_k1(ProblemId::homogeneous, true);
    report(id, "homogeneous k=1 q=0 Shishkin sigma=2", o.verdict);
    note(id, o.supplementary);
}

void criterion_second_order(int id)
{
    const StudyOutcome o = rates_k2(ProblemId::homogeneous);
    report(id, "homogeneous k=2 q=1 Shishkin sigma=3", o.verdict);
    note(id, o.supplementary);
}

void criterion_quadratic_history(int id)
{
    const StudyOutcome a = rates_k1(ProblemId::quadratic, false);
    const StudyOutcome b = rates_k2(ProblemId::quadratic);
    const Verdict v{a.verdict.pass && b.verdict.pass, "k=1: " + a.verdict.detail + " | k=2: " + b.verdict.detail};
    report(id, "quadratic history k=1/q=0 and k=2/q=1 Shishkin sigma=k+1", v);
    note(id, a.supplementary);
    note(id, b.supplementary);
}

void criterion_robustness(int id)
{
    std::vector<double> values;
    std::vector<std::string> rounded;
    for (double eps : {1e-6, 1e-8, 1e-10}) {
        StudyConfig cfg;
        cfg.family = MeshFamily::bakhvalov_s;
        cfg.k = 2;
        cfg.q = 1;
        cfg.epsilon = eps;
        cfg.cells = {256};
        cfg.weights = {WeightKind::energy};
        const auto r = convergence_study(cfg);
        values.push_back(r.errors("l2_e").front());
        rounded.push_back(fmt("%.2e", values.back()));
    }
    Verdict v;
    const bool agree = std::all_of(rounded.begin(), rounded.end(), [&](const std::string& s) { return s == rounded[0]; });
    double factor = 1.0;
    for (double e : values) {
        factor = std::max({factor, e / kRobustValue, kRobustValue / e});
    }
    v.pass = agree && factor <= kMagnitudeFactor;
    v.detail = "l2_e at N=256 for eps=1e-6,1e-8,1e-10: " + list(values, "%.6e") + (agree ? " agree to 3 digits" : " differ") +
               "; factor to 3.30e-05 is " + fmt("%.3f", factor);
    report(id, "eps-robustness k=2 q=1 Bakhvalov-S", v);
}

struct CoefficientSet {
    const char* name;
    double alpha;
    double gamma;
    std::function<double(double)> a;
    std::function<double(double)> b;
};

void criterion_coercivity(int id)
{
    const std::vector<CoefficientSet> sets{
        {"a=4,b=1", 2.0, 3.0, [](double) { return 4.0; }, [](double) { return 1.0; }},
        {"a=2+x,b=1/2", std::sqrt(2.0), 1.5, [](double x) { return 2.0 + x; }, [](double) { return 0.5; }},
        {"a=1+x^2,b=-cos(x)/2", 1.0, 0.5, [](double x) { return 1.0 + x * x; }, [](double x) { return -0.5 * std::cos(x); }},
    };
    double worst = std::numeric_limits<double>::infinity();
    std::string worst_case;
    int cases = 0;
    for (MeshFamily family : {MeshFamily::shishkin, MeshFamily::bakhvalov_s, MeshFamily::duran}) {
        for (int k : {1, 2}) {
            for (WeightKind wk : {WeightKind::energy, WeightKind::balanced}) {
                for (const auto& set : sets) {
                    for (double eps : {1e-2, 1e-4, 1e-6}) {
                        MeshConfig mcfg;
                        mcfg.family = family;
                        mcfg.cells = 32;
                        mcfg.grading = 0.5;
                        mcfg.sigma = k + 1.0;
                        mcfg.alpha = set.alpha;
                        mcfg.epsilon = eps;
                        const auto space = build_fespace(build_mesh(mcfg), k);
                        StationaryCoefficients c;
                        c.a = set.a;
                        c.b = set.b;
                        c.f = [](double) { return 0.0; };
                        c.phi = [](double) { return 0.0; };
                        c.epsilon = eps;
                        c.alpha = set.alpha;
                        c.gamma = set.gamma;
                        const Weight w = make_weight(wk, eps, set.alpha);
                        const CellQuadrature quad(*space, w);
                        const double margin =
                            coercivity_margin(assemble_bilinear(quad, c), assemble_triple_gram(quad, eps, set.gamma));
                        ++cases;
                        if (margin < worst) {
                            worst = margin;
                            worst_case = std::string(to_string(family)) + " k=" + std::to_string(k) + " " +
                                         std::string(to_string(wk)) + " " + set.name + " eps=" + fmt("%.0e", eps);
                        }
                    }
                }
            }
        }
    }
    Verdict v;
    v.pass = worst >= kMarginFloor;
    v.detail = std::to_string(cases) + " cases, smallest margin " + fmt("%.3e", worst) + " (" + worst_case + ")";
    report(id, "coercivity margin B(v,v) - |||v|||^2/2 over the test grid", v);
}

void criterion_quadrature(int id)
{
    double worst_gauss = 0.0;
    for (int n = 1; n <= 32; ++n) {
        const QuadRule r = gauss_rule(n);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0.0;
            for (std::size_t p = 0; p < r.size(); ++p) {
                s += r.weights[p] * std::pow(r.nodes[p], d);
            }
            const double exact = d % 2 == 0 ? 2.0 / (d + 1) : 0.0;
            worst_gauss = std::max(worst_gauss, std::abs(s - exact));
        }
    }
    double worst_radau = 0.0;
    for (int q = 0; q <= 6; ++q) {
        const TimeQuadRule r = radau_rule(q);
        for (int d = 0; d <= 2 * q; ++d) {
            double s = 0.0;
            for (std::size_t p = 0; p < r.size(); ++p) {
                s += r.weights[p] * std::pow(r.nodes[p], d);
            }
            const double exact = d % 2 == 0 ? 2.0 / (d + 1) : 0.0;
            worst_radau = std::max(worst_radau, std::abs(s - exact));
        }
    }
    Verdict v;
    v.pass = worst_gauss <= kQuadratureTol && worst_radau <= kQuadratureTol;
    v.detail = "Gauss n=1..32 degree<=2n-1 max error " + fmt("%.2e", worst_gauss) + "; Radau q=0..6 degree<=2q max error " +
               fmt("%.2e", worst_radau);
    report(id, "quadrature exactness", v);
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double mass_norm(const SparseMatrix& m, const std::vector<double>& v)
{
    const auto mv = m * v;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += v[i] * mv[i];
    }
    return std::sqrt(std::max(s, 0.0));
}

/// sup_t |U(t) - theta(t) g|_beta for the semi-discrete problem whose exact solution is theta(t) g.
std::vector<double> temporal_errors(int q, const std::vector<int>& slab_counts)
{
    const double eps = 1e-2;
    StationaryCoefficients c;
    c.a = [](double x) { return 2.0 + x; };
    c.b = [](double) { return 0.5; };
    c.f = [](double) { return 0.0; };
    c.phi = [](double) { return 0.0; };
    c.epsilon = eps;
    c.alpha = std::sqrt(2.0);
    c.gamma = 1.0;
    MeshConfig mcfg;
    mcfg.cells = 32;
    mcfg.epsilon = eps;
    mcfg.alpha = c.alpha;
    const auto space = build_fespace(build_mesh(mcfg), 2);
    const CellQuadrature quad(*space, make_weight(WeightKind::energy, eps, c.alpha));
    DiscreteProblem prob;
    prob.mass = assemble_weighted_mass(quad);
    const SparseMatrix b = assemble_bilinear(quad, c);
    prob.stiffness = [&b](double) { return b; };
    std::vector<double> g(space->n_free());
    for (int i = 0; i < space->n_free(); ++i) {
        const double x = space->dof_coordinates()[i + 1];
        g[i] = std::sin(std::numbers::pi * x / 2.0) * (2.0 - x);
    }
    const auto mg = prob.mass * g;
    const auto bg = b * g;
    auto theta = [](double t) { return std::sin(2.0 * t); };
    prob.load = [&](double t) {
        std::vector<double> f(g.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] = 2.0 * std::cos(2.0 * t) * mg[i] + theta(t) * bg[i];
        }
        return f;
    };
    prob.initial.assign(g.size(), 0.0);
    const TimeQuadRule rule = radau_rule(q);
    std::vector<double> out;
    for (int slabs : slab_counts) {
        const TimeMesh tm = TimeMesh::uniform(1.0, slabs);
        const auto stages = dg_march(prob, tm, rule);
        double sup = 0.0;
        std::vector<double> l(q + 1);
        for (int m = 0; m < slabs; ++m) {
            for (int s = 0; s <= 20; ++s) {
                const double t_hat = -1.0 + 0.1 * s;
                lagrange_values(rule.nodes, t_hat, l);
                const double t = tm.map(m, t_hat);
                std::vector<double> e(g.size());
                for (std::size_t d = 0; d < e.size(); ++d) {
                    e[d] = -theta(t) * g[d];
                    for (int i = 0; i <= q; ++i) {
                        e[d] += l[i] * stages[m * (q + 1) + i][d];
                    }
                }
                sup = std::max(sup, mass_norm(prob.mass, e));
            }
        }
        out.push_back(sup);
    }
    return out;
}

void criterion_manufactured(int id)
{
    Verdict v;
    std::ostringstream d;
    const std::vector<int> cells{32, 64, 128, 256};
    for (int k : {1, 2}) {
        const ProblemSpec spec = make_problem(ProblemId::manufactured_sin, 1e-4, 1.0, kExampleAlpha, 1.0);
        std::vector<double> lx, ly;
        for (int n : cells) {
            MeshConfig mcfg;
            mcfg.family = MeshFamily::shishkin;
            mcfg.cells = n;
            mcfg.sigma = k + 1.0;
            mcfg.alpha = spec.alpha;
            mcfg.epsilon = spec.epsilon;
            const auto sol = dg_solve(spec, mcfg, k, k - 1, TimeMesh::uniform(1.0, n / 4), WeightKind::energy);
            const double e = q_triple_norm_error(sol, exact_of(smooth_manufactured()));
            lx.push_back(std::log(std::log(double(n)) / n));
            ly.push_back(std::log(e));
        }
        const double p = fitted_slope(lx, ly);
        const bool ok = p >= k - kSpaceOrderSlack;
        v.pass = v.pass && ok;
        d << "k=" << k << " q=" << k - 1 << " Q-triple order vs N^-1 ln N " << fmt("%.2f", p) << "; ";
    }
    const std::vector<int> slabs{8, 16, 32, 64};
    for (int q : {0, 1, 2}) {
        const auto e = temporal_errors(q, slabs);
        std::vector<double> rates;
        for (std::size_t i = 1; i < e.size(); ++i) {
            rates.push_back(std::log2(e[i - 1] / e[i]));
        }
        const double worst = *std::min_element(rates.begin(), rates.end());
        const bool ok = worst >= q + 1.0 - kTimeOrderSlack;
        v.pass = v.pass && ok;
        d << "q=" << q << " sup-L2 time rates " << list(rates) << (q < 2 ? "; " : "");
    }
    v.detail = d.str();
    report(id, "manufactured solution orders", v);
}

void criterion_interpolation(int id)
{
    Verdict v;
    std::ostringstream d;
    for (MeshFamily family : {MeshFamily::shishkin, MeshFamily::bakhvalov_s, MeshFamily::duran}) {
        for (int k : {1, 2}) {
            StudyConfig cfg;
            cfg.kind = StudyKind::interpolation;
            cfg.family = family;
            cfg.k = k;
            cfg.epsilon = 1e-6;
            cfg.alpha = 1.0;
            cfg.cells = {128, 256, 512};
            cfg.gradings = {0.2, 0.1, 0.05};
            const auto r = convergence_study(cfg);
            const auto& last = r.rows[r.rows.size() - 2];
            const double target = family == MeshFamily::duran ? k + 1.0 : last.g_l2_rate;
            const double r_inf = last.rates[r.column("linf")];
            const double r_l2 = last.rates[r.column("l2_e")];
            const bool ok = std::abs(r_inf - target) <= kInterpolationRateTol && std::abs(r_l2 - target) <= kInterpolationRateTol;
            v.pass = v.pass && ok;
            d << to_string(family) << " k=" << k << " Linf/L2 " << fmt("%.2f", r_inf) << "/" << fmt("%.2f", r_l2)
              << " vs " << fmt("%.2f", target) << "; ";
        }
    }
    v.detail = d.str();
    v.detail.resize(v.detail.size() - 2);
    report(id, "interpolation of the left layer", v);
}

void criterion_mesh_sweep(int id)
{
    std::mt19937 rng(424242);
    std::uniform_int_distribution<int> blocks(1, 128);
    std::uniform_real_distribution<double> log_eps(-12.0, 0.0);
    std::uniform_real_distribution<double> sigma_dist(0.5, 5.0);
    std::uniform_real_distribution<double> alpha_dist(0.1, 4.0);
    std::uniform_real_distribution<double> grading_dist(0.02, 0.9);
    int violations = 0;
    std::string first;
    auto fail = [&](const std::string& what) {
        if (violations++ == 0) first = what;
    };
    for (int trial = 0; trial < kMeshSweep; ++trial) {
        MeshConfig cfg;
        cfg.family = trial % 3 == 0 ? MeshFamily::shishkin : trial % 3 == 1 ? MeshFamily::bakhvalov_s : MeshFamily::duran;
        cfg.cells = 8 * blocks(rng);
        cfg.epsilon = std::pow(10.0, log_eps(rng));
        cfg.sigma = sigma_dist(rng);
        cfg.alpha = alpha_dist(rng);
        cfg.grading = grading_dist(rng);
        if (cfg.family == MeshFamily::duran && cfg.grading * cfg.epsilon >= 0.5) {
            cfg.epsilon *= 0.1;
        }
        const Mesh1D mesh = build_mesh(cfg);
        const int n = mesh.cells();
        const int half = n / 2;
        const std::string tag = std::string(to_string(cfg.family)) + " trial " + std::to_string(trial);
        if (n % 2 != 0 || mesh.nodes.front() != 0.0 || mesh.nodes.back() != 2.0 || mesh.nodes[half] != 1.0) {
            fail(tag + ": end points");
        }
        for (int i = 0; i < n; ++i) {
            if (!(mesh.nodes[i] < mesh.nodes[i + 1])) fail(tag + ": monotonicity");
        }
        for (int i = 1; i < half; ++i) {
            if (mesh.nodes[half + i] != 1.0 + mesh.nodes[i]) fail(tag + ": translation");
        }
        if (cfg.family == MeshFamily::duran) {
            const int m = *mesh.duran_m;
            const double h1 = cfg.grading * cfg.epsilon;
            if (!(h1 * std::pow(1.0 + cfg.grading, m - 2) < 0.5 && h1 * std::pow(1.0 + cfg.grading, m - 1) >= 0.5)) {
                fail(tag + ": M");
            }
            if (mesh.nodes[1] != h1) fail(tag + ": x_1");
            const int q = half / 2;
            for (int i = 2; i < q; ++i) {
                if (mesh.nodes[i] != (1.0 + cfg.grading) * mesh.nodes[i - 1]) fail(tag + ": recursion");
            }
            if (mesh.nodes[q] != 0.5) fail(tag + ": midpoint");
        } else {
            const double lambda = std::min(0.25, cfg.sigma * cfg.epsilon * std::log(static_cast<double>(n)) / cfg.alpha);
            if (*mesh.lambda != lambda || mesh.nodes[n / 8] != lambda || mesh.nodes[3 * n / 8] != 1.0 - lambda) {
                fail(tag + ": lambda");
            }
        }
    }
    Verdict v;
    v.pass = violations == 0;
    v.detail = std::to_string(kMeshSweep) + " random configs over three families, " + std::to_string(violations) +
               " violations" + (first.empty() ? "" : " (first: " + first + ")");
    report(id, "mesh invariants", v);
}

void criterion_backward_euler(int id)
{
    double worst_matrix = 0.0;
    double worst_rhs = 0.0;
    double worst_solution = 0.0;
    for (WeightKind wk : {WeightKind::energy, WeightKind::balanced}) {
        const ProblemSpec spec = builtin_problem(ProblemId::homogeneous, 1e-2, 1.0);
        MeshConfig mcfg;
        mcfg.cells = 16;
        mcfg.epsilon = spec.epsilon;
        mcfg.alpha = spec.alpha;
        mcfg.sigma = 2.0;
        const auto space = build_fespace(build_mesh(mcfg), 1);
        const int slabs = 4;
        const TimeMesh tm = TimeMesh::uniform(1.0, slabs);
        const double tau = tm.width(0);
        const auto sol = dg_solve_on_space(spec, space, 0, tm, wk);

        const CellQuadrature quad(*space, make_weight(wk, spec.epsilon, spec.alpha));
        const SparseMatrix m = assemble_weighted_mass(quad);
        const SparseMatrix b = assemble_bilinear(quad, spec.frozen(0.0));
        const TimeQuadRule rule = radau_rule(0);
        const SparseMatrix slab = assemble_slab_matrix(m, std::span<const SparseMatrix>(&b, 1), rule, tau);
        for (int i = 0; i < m.size(); ++i) {
            for (int j = 0; j < m.size(); ++j) {
                worst_matrix = std::max(worst_matrix, std::abs(slab.at(i, j) - (m.at(i, j) + tau * b.at(i, j))));
            }
        }
        std::vector<Triplet> t;
        m.append_to(t, 1.0, 0, 0);
        b.append_to(t, tau, 0, 0);
        const Factorization fact = lu_factor(SparseMatrix::from_triplets(m.size(), t));
        std::vector<double> u(m.size(), 0.0);
        for (int step = 1; step <= slabs; ++step) {
            const std::vector<double> load = assemble_load(quad, spec.frozen(tm.points[step]));
            const std::vector<double> slab_rhs =
                assemble_slab_rhs(m, std::span<const std::vector<double>>(&load, 1), u, rule, tau);
            std::vector<double> rhs = m * u;
            for (std::size_t i = 0; i < rhs.size(); ++i) {
                rhs[i] += tau * load[i];
                worst_rhs = std::max(worst_rhs, std::abs(slab_rhs[i] - rhs[i]));
            }
            u = solve(fact, rhs);
            const auto& stage = sol.stage(step - 1, 0);
            for (std::size_t i = 0; i < u.size(); ++i) {
                worst_solution = std::max(worst_solution, std::abs(stage[i + 1] - u[i]));
            }
        }
    }
    Verdict v;
    v.pass = worst_matrix <= kEquivalenceTol && worst_rhs <= kEquivalenceTol && worst_solution <= kEquivalenceTol;
    v.detail = "N=16 k=1, both weights: max entry difference matrix " + fmt("%.2e", worst_matrix) + ", right-hand side " +
               fmt("%.2e", worst_rhs) + ", solution " + fmt("%.2e", worst_solution);
    report(id, "dG(0) equals (M + tau B) U_m = M U_{m-1} + tau F(t_m)", v);
}

} // namespace

int main(int argc, char** argv)
{
    bool strict = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--strict") == 0) {
            strict = true;
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    criterion_first_order(1);
    criterion_second_order(2);
    criterion_robustness(3);
    criterion_quadratic_history(4);
    criterion_coercivity(5);
    criterion_quadrature(6);
    criterion_manufactured(7);
    criterion_interpolation(8);
    criterion_mesh_sweep(9);
    criterion_backward_euler(10);
    std::printf("%d criterion line(s) failed; total %.1f s\n", g_failures, since(t0));
    return strict && g_failures > 0 ? 1 : 0;
}
