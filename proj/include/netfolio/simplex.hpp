#pragma once

#include <Eigen/Dense>

namespace netfolio {

/// minimize c'x  subject to  A x = b,  0 <= x <= upper  (upper may be +inf)
struct LinearProgram {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    Eigen::VectorXd upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
    LpStatus status = LpStatus::IterationLimit;
    Eigen::VectorXd x;
    Eigen::VectorXd duals;  ///< y with reduced costs c - A'y
    double objective = 0.0;
    int iterations = 0;
};

struct SimplexOptions {
    double tolerance = 1e-9;
    int max_iterations = 100000;
};

/// Dense two-phase bounded-variable primal simplex. Dantzig pricing, with
/// Bland's rule while the objective stalls on degenerate pivots.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace netfolio
