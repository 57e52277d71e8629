#pragma once

#include "errors.hpp"
#include "sparse.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace shiftdg {

namespace detail {

inline Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a)
{
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(a.nonzeros());
    const auto& rp = a.row_offsets();
    const auto& ci = a.column_indices();
    const auto& v = a.values();
    for (int i = 0; i < a.size(); ++i) {
        for (int p = rp[i]; p < rp[i + 1]; ++p) {
            t.emplace_back(i, ci[p], v[p]);
        }
    }
    Eigen::SparseMatrix<double> m(a.size(), a.size());
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

} // namespace detail

/// Sparse LU with column (COLAMD) and partial row pivoting: P A Q = L U.
/// Immutable once built; copies share the factors.
class Factorization {
public:
    using Solver = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;

    Factorization() = default;
    Factorization(std::shared_ptr<const Solver> solver, int n) : solver_(std::move(solver)), n_(n) {}

    [[nodiscard]] int size() const { return n_; }
    [[nodiscard]] const Solver& solver() const { return *solver_; }
    [[nodiscard]] bool valid() const { return static_cast<bool>(solver_); }

private:
    std::shared_ptr<const Solver> solver_;
    int n_ = 0;
};

inline Factorization lu_factor(const SparseMatrix& a)
{
    auto solver = std::make_shared<Factorization::Solver>();
    const Eigen::SparseMatrix<double> m = detail::to_eigen(a);
    solver->analyzePattern(m);
    solver->factorize(m);
    if (solver->info() != Eigen::Success) {
        throw SingularMatrix("lu_factor: " + solver->lastErrorMessage());
    }
    return Factorization(std::move(solver), a.size());
}

inline std::vector<double> solve(const Factorization& fact, std::span<const double> rhs)
{
    if (!fact.valid()) {
        throw InvalidConfig("solve: empty factorization");
    }
    if (static_cast<int>(rhs.size()) != fact.size()) {
        throw InvalidConfig("solve: right-hand side has length " + std::to_string(rhs.size()) + ", expected " +
                            std::to_string(fact.size()));
    }
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    const Eigen::VectorXd x = fact.solver().solve(b);
    return {x.data(), x.data() + x.size()};
}

} // namespace shiftdg
