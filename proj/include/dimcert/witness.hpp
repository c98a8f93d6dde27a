#pragma once

#include "dimcert/stats.hpp"

#include <Eigen/Dense>

// Closed-form entanglement-existence criteria for dichotomic statistics with
// unbiased marginals: fast analytic pre-checks for the numerical layer.

namespace dimcert::witness {

struct CorrelationMatrix {
    Eigen::MatrixXd d;  // d(x,y) = <A_x B_y>
    static CorrelationMatrix from_table(const stats::ProbTable& p);
};

struct Verdict {
    bool certified = false;
    double margin = 0.0;
};

// Two settings per party: certified iff sqrt(l1)+sqrt(l2) > sqrt(2) with
// l1,l2 the singular values of D2. Requires unbiased marginals (1e-9);
// throws std::domain_error otherwise (the criterion's stated scope).
Verdict d2_criterion(const stats::ProbTable& p);

// Three settings per party: certified iff |det D3| > 1/27.
Verdict d3_criterion(const stats::ProbTable& p);

}  // namespace dimcert::witness
