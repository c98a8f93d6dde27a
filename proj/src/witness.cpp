#include "dimcert/witness.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace dimcert::witness {

namespace {

void require_dichotomic_unbiased(const stats::ProbTable& p, int n) {
    if (p.ka != 2 || p.kb != 2)
        throw std::domain_error("criterion requires dichotomic outcomes");
    if (p.nx != n || p.ny != n)
        throw std::domain_error("criterion requires " + std::to_string(n) +
                                " settings per party");
    const auto rep = stats::validate(p);
    for (const auto& row : rep.marginals_a)
        for (double m : row)
            if (std::abs(m - 0.5) > 1e-9)
                throw std::domain_error(
                    "criterion applies to unbiased marginals only");
    for (const auto& row : rep.marginals_b)
        for (double m : row)
            if (std::abs(m - 0.5) > 1e-9)
                throw std::domain_error(
                    "criterion applies to unbiased marginals only");
}

}  // namespace

CorrelationMatrix CorrelationMatrix::from_table(const stats::ProbTable& p) {
    CorrelationMatrix c;
    c.d.resize(p.nx, p.ny);
    for (int x = 0; x < p.nx; ++x)
        for (int y = 0; y < p.ny; ++y) c.d(x, y) = stats::correlator(p, x, y);
    return c;
}

Verdict d2_criterion(const stats::ProbTable& p) {
    require_dichotomic_unbiased(p, 2);
    const auto corr = CorrelationMatrix::from_table(p);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(corr.d);
    const auto& s = svd.singularValues();
    Verdict v;
    v.margin = std::sqrt(s(0)) + std::sqrt(s(1)) - std::sqrt(2.0);
    v.certified = v.margin > 0.0;
    return v;
}

Verdict d3_criterion(const stats::ProbTable& p) {
    require_dichotomic_unbiased(p, 3);
    const auto corr = CorrelationMatrix::from_table(p);
    Verdict v;
    v.margin = std::abs(corr.d.determinant()) - 1.0 / 27.0;
    v.certified = v.margin > 0.0;
    return v;
}

}  // namespace dimcert::witness
