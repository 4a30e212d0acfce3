#include "netfolio/simplex.hpp"

#include "netfolio/error.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace netfolio {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Tableau over [A | I] where the identity columns are the phase-one
// artificials. The artificial block of the tableau is B^-1, which gives
// both the duals and a way to recompute x_B without drift.
class Tableau {
public:
    Tableau(const LinearProgram& lp, const SimplexOptions& opt)
        : opt_(opt), rows_(lp.A.rows()), n_(lp.A.cols()), total_(n_ + rows_)
    {
        sign_ = Eigen::VectorXd::Ones(rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (lp.b(i) < 0.0) {
                sign_(i) = -1.0;
            }
        }
        a_ = sign_.asDiagonal() * lp.A;
        b_ = sign_.cwiseProduct(lp.b);
        t_.resize(rows_, total_);
        t_.leftCols(n_) = a_;
        t_.rightCols(rows_).setIdentity();
        upper_.resize(total_);
        upper_.head(n_) = lp.upper;
        upper_.tail(rows_).setConstant(inf);
        at_upper_.assign(static_cast<std::size_t>(total_), false);
        basis_.resize(static_cast<std::size_t>(rows_));
        in_basis_.assign(static_cast<std::size_t>(total_), -1);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            basis_[static_cast<std::size_t>(i)] = n_ + i;
            in_basis_[static_cast<std::size_t>(n_ + i)] = static_cast<int>(i);
        }
        xb_ = b_;
    }

    LpStatus run_phase(const Eigen::VectorXd& cost, bool allow_artificials, int& iterations)
    {
        cost_ = cost;
        price();
        int stall = 0;
        bool bland = false;
        while (iterations < opt_.max_iterations) {
            const Eigen::Index q = choose_entering(allow_artificials, bland);
            if (q < 0) {
                return LpStatus::Optimal;
            }
            ++iterations;
            const double step = move(q, bland);
            if (std::isinf(step)) {
                return LpStatus::Unbounded;
            }
            if (step <= opt_.tolerance) {
                bland = ++stall > 50;
            } else {
                stall = 0;
                bland = false;
            }
            if (iterations % 100 == 0) {
                refresh();
            }
        }
        return LpStatus::IterationLimit;
    }

    void bar_artificials()
    {
        upper_.tail(rows_).setZero();
    }

    double artificial_sum() const
    {
        double s = 0.0;
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] >= n_) {
                s += xb_(i);
            }
        }
        return s;
    }

    Eigen::VectorXd solution() const
    {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
        for (Eigen::Index j = 0; j < n_; ++j) {
            if (at_upper_[static_cast<std::size_t>(j)]) {
                x(j) = upper_(j);
            }
        }
        for (Eigen::Index i = 0; i < rows_; ++i) {
            const auto j = basis_[static_cast<std::size_t>(i)];
            if (j < n_) {
                x(j) = xb_(i);
            }
        }
        return x;
    }

    /// Duals of the original rows (undoing the sign normalisation).
    Eigen::VectorXd duals() const
    {
        Eigen::RowVectorXd cb(rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            cb(i) = cost_(basis_[static_cast<std::size_t>(i)]);
        }
        const Eigen::RowVectorXd y = cb * t_.rightCols(rows_);
        return sign_.cwiseProduct(y.transpose());
    }

    void refresh()
    {
        Eigen::VectorXd rhs = b_;
        for (Eigen::Index j = 0; j < n_; ++j) {
            if (at_upper_[static_cast<std::size_t>(j)] && in_basis_[static_cast<std::size_t>(j)] < 0) {
                rhs -= a_.col(j) * upper_(j);
            }
        }
        xb_ = t_.rightCols(rows_) * rhs;
    }

private:
    void price()
    {
        Eigen::RowVectorXd cb(rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            cb(i) = cost_(basis_[static_cast<std::size_t>(i)]);
        }
        d_ = cost_.transpose() - cb * t_;
    }

    Eigen::Index choose_entering(bool allow_artificials, bool bland) const
    {
        const Eigen::Index limit = allow_artificials ? total_ : n_;
        Eigen::Index best = -1;
        double best_score = opt_.tolerance;
        for (Eigen::Index j = 0; j < limit; ++j) {
            const auto k = static_cast<std::size_t>(j);
            if (in_basis_[k] >= 0 || upper_(j) == 0.0) {
                continue;
            }
            const double score = at_upper_[k] ? d_(j) : -d_(j);
            if (score > best_score) {
                if (bland) {
                    return j;
                }
                best = j;
                best_score = score;
            }
        }
        return best;
    }

    // Moves entering column q as far as the bounds allow; returns the step.
    double move(Eigen::Index q, bool bland)
    {
        const auto kq = static_cast<std::size_t>(q);
        const double dir = at_upper_[kq] ? -1.0 : 1.0;
        const double pivot_tol = opt_.tolerance;
        double step = upper_(q);
        Eigen::Index leave = -1;
        bool leave_to_upper = false;
        double leave_mag = 0.0;
        for (Eigen::Index i = 0; i < rows_; ++i) {
            const double g = dir * t_(i, q);
            const auto j = basis_[static_cast<std::size_t>(i)];
            double limit = inf;
            bool to_upper = false;
            if (g > pivot_tol) {
                limit = std::max(xb_(i), 0.0) / g;
            } else if (g < -pivot_tol && std::isfinite(upper_(j))) {
                limit = std::max(upper_(j) - xb_(i), 0.0) / -g;
                to_upper = true;
            } else {
                continue;
            }
            const bool better = limit < step - 1e-12
                || (leave >= 0 && limit <= step + 1e-12
                    && (bland ? j < basis_[static_cast<std::size_t>(leave)] : std::abs(g) > leave_mag));
            if (better || (leave < 0 && limit < step)) {
                step = limit;
                leave = i;
                leave_to_upper = to_upper;
                leave_mag = std::abs(g);
            }
        }
        if (std::isinf(step)) {
            return step;
        }
        xb_ -= (dir * step) * t_.col(q);
        if (leave < 0) {
            at_upper_[kq] = !at_upper_[kq];
            return step;
        }
        const double entering_value = (at_upper_[kq] ? upper_(q) : 0.0) + dir * step;
        const auto old = basis_[static_cast<std::size_t>(leave)];
        at_upper_[static_cast<std::size_t>(old)] = leave_to_upper;
        in_basis_[static_cast<std::size_t>(old)] = -1;
        at_upper_[kq] = false;
        basis_[static_cast<std::size_t>(leave)] = q;
        in_basis_[kq] = static_cast<int>(leave);

        const double p = t_(leave, q);
        t_.row(leave) /= p;
        const Eigen::VectorXd col = t_.col(q);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            if (i != leave && col(i) != 0.0) {
                t_.row(i) -= col(i) * t_.row(leave);
            }
        }
        d_ -= d_(q) * t_.row(leave);
        xb_(leave) = entering_value;
        return step;
    }

    SimplexOptions opt_;
    Eigen::Index rows_;
    Eigen::Index n_;
    Eigen::Index total_;
    Eigen::VectorXd sign_;
    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    Eigen::MatrixXd t_;
    Eigen::VectorXd upper_;
    Eigen::VectorXd cost_;
    Eigen::RowVectorXd d_;
    Eigen::VectorXd xb_;
    std::vector<bool> at_upper_;
    std::vector<Eigen::Index> basis_;
    std::vector<int> in_basis_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options)
{
    const auto m = lp.A.rows();
    const auto n = lp.A.cols();
    if (lp.b.size() != m || lp.c.size() != n || lp.upper.size() != n) {
        throw UsageError("linear program dimensions do not agree");
    }
    if ((lp.upper.array() < 0.0).any()) {
        throw UsageError("upper bounds must be non-negative");
    }
    Tableau tab(lp, options);
    LpSolution sol;

    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
    phase1.tail(m).setOnes();
    sol.status = tab.run_phase(phase1, true, sol.iterations);
    if (sol.status != LpStatus::Optimal) {
        return sol;
    }
    tab.refresh();
    const double scale = 1.0 + lp.b.cwiseAbs().sum();
    if (tab.artificial_sum() > 1e-8 * scale) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }

    tab.bar_artificials();
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
    phase2.head(n) = lp.c;
    sol.status = tab.run_phase(phase2, false, sol.iterations);
    tab.refresh();
    sol.x = tab.solution();
    sol.duals = tab.duals();
    sol.objective = lp.c.dot(sol.x);
    return sol;
}

}  // namespace netfolio
