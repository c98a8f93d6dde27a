#include "dimcert/qmat.hpp"

#include "dimcert/kernels.hpp"
#include "dimcert/stats.hpp"
#include "quartic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dimcert::qmat {

namespace {

constexpr double kEigClamp = 1e-12;  // spectra in [-1e-12, 0) are PSD drift

const double* raw(const Mat4& m) { return reinterpret_cast<const double*>(m.data()); }
double* raw(Mat4& m) { return reinterpret_cast<double*>(m.data()); }

void require_state(const Mat4& rho, double psd_tol, double trace_tol) {
    if (std::abs(rho.trace().real() - 1.0) > trace_tol ||
        std::abs(rho.trace().imag()) > trace_tol)
        throw std::domain_error("state trace differs from 1");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::domain_error("state is not Hermitian");
    if (min_eigenvalue(rho) < -psd_tol)
        throw std::domain_error("state is not positive semidefinite");
}

// Descending square roots of the (clamped) eigenvalues of rho*rho~.
Eigen::Vector4d spin_flip_roots(const Mat4& rho) {
    Mat4 flipped, prod;
    kern::spinflip4(raw(rho), raw(flipped));
    kern::active().matmul4(raw(rho), raw(flipped), raw(prod));
    // rho*rho~ is similar to a PSD Hermitian matrix: eigenvalues are real
    // and nonnegative up to roundoff.
    Eigen::ComplexEigenSolver<Mat4> es(prod, /*computeEigenvectors=*/false);
    Eigen::Vector4d ev;
    for (int i = 0; i < 4; ++i) ev(i) = std::max(0.0, es.eigenvalues()(i).real());
    std::sort(ev.data(), ev.data() + 4, std::greater<double>());
    return ev.cwiseSqrt();
}

}  // namespace

Mat2 pauli(int axis) {
    Mat2 m;
    switch (axis) {
        case 0: m << 0, 1, 1, 0; break;
        case 1: m << 0, cd(0, -1), cd(0, 1), 0; break;
        case 2: m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("pauli axis must be 0,1,2");
    }
    return m;
}

Mat4 phi_plus() {
    Mat4 m = Mat4::Zero();
    m(0, 0) = m(0, 3) = m(3, 0) = m(3, 3) = 0.5;
    return m;
}

Mat4 werner(double w) {
    return w * phi_plus() + (1.0 - w) * 0.25 * Mat4::Identity();
}

Eigen::Vector4cd pure_theta(double theta) {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v(0) = std::cos(theta);
    v(3) = std::sin(theta);
    return v;
}

std::vector<Mat2> sic_povm() {
    const double s = 1.0 / (3.0 * std::sqrt(2.0));
    const cd chi = std::polar(1.0, 2.0 * M_PI / 3.0);
    Mat2 s0, s1, s2, s3;
    s0 << 0.5, 0, 0, 0;
    s1 << 1.0 / 6.0, s, s, 1.0 / 3.0;
    s2 << 1.0 / 6.0, chi * s, std::conj(chi) * s, 1.0 / 3.0;
    s3 << 1.0 / 6.0, std::conj(chi) * s, chi * s, 1.0 / 3.0;
    return {s0, s1, s2, s3};
}

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

Mat4 density_from_bloch(const Vec3& m_a, const Vec3& m_b, const Mat3& t) {
    Mat4 rho;
    kern::bloch_density(m_a.data(), m_b.data(), t.data(), raw(rho));
    return rho;
}

Mat4 TwoQubitState::density() const { return density_from_bloch(m_a, m_b, t); }

TwoQubitState TwoQubitState::from_density(const Mat4& rho) {
    TwoQubitState s;
    for (int i = 0; i < 3; ++i) {
        Mat4 ai, bi;
        kern::active().kron22(reinterpret_cast<const double*>(Mat2(pauli(i)).data()),
                              reinterpret_cast<const double*>(Mat2(Mat2::Identity()).data()),
                              raw(ai));
        kern::active().kron22(reinterpret_cast<const double*>(Mat2(Mat2::Identity()).data()),
                              reinterpret_cast<const double*>(Mat2(pauli(i)).data()),
                              raw(bi));
        s.m_a(i) = (rho * ai).trace().real();
        s.m_b(i) = (rho * bi).trace().real();
        for (int j = 0; j < 3; ++j) {
            Mat4 tij;
            kern::active().kron22(reinterpret_cast<const double*>(Mat2(pauli(i)).data()),
                                  reinterpret_cast<const double*>(Mat2(pauli(j)).data()),
                                  raw(tij));
            s.t(i, j) = (rho * tij).trace().real();
        }
    }
    return s;
}

Povm Povm::dichotomic(double eta, const Vec3& axis) {
    Mat2 n = axis(0) * pauli(0) + axis(1) * pauli(1) + axis(2) * pauli(2);
    Povm p;
    p.elements = {0.5 * (Mat2::Identity() + eta * n),
                  0.5 * (Mat2::Identity() - eta * n)};
    return p;
}

double Povm::min_eigenvalue() const {
    double m = 0.0;
    bool first = true;
    for (const auto& e : elements) {
        // 2x2 Hermitian closed form
        const double tr = e.trace().real();
        const double det = (e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0)).real();
        const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
        const double lo = 0.5 * (tr - disc);
        if (first || lo < m) m = lo;
        first = false;
    }
    return m;
}

double Povm::completeness_error() const {
    Mat2 s = Mat2::Zero();
    for (const auto& e : elements) s += e;
    return (s - Mat2::Identity()).cwiseAbs().maxCoeff();
}

bool Povm::valid(double tol) const {
    return !elements.empty() && min_eigenvalue() >= -tol &&
           completeness_error() <= tol;
}

double min_eigenvalue(const Mat4& h) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (h + h.adjoint()),
                                           Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double concurrence_unchecked(const Mat4& rho) {
    const Eigen::Vector4d e = spin_flip_roots(rho);
    return std::max(0.0, e(0) - e(1) - e(2) - e(3));
}

double concurrence(const Mat4& rho) {
    require_state(rho, 1e-10, 1e-10);
    return concurrence_unchecked(rho);
}

double concurrence_sqrt_form(const Mat4& rho) {
    require_state(rho, 1e-10, 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (rho + rho.adjoint()));
    Eigen::Vector4d lam = es.eigenvalues().cwiseMax(0.0);
    const Mat4 sqrt_rho = es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
                          es.eigenvectors().adjoint();
    Mat4 flipped;
    kern::spinflip4(raw(rho), raw(flipped));
    const Mat4 m = sqrt_rho * flipped * sqrt_rho;
    Eigen::SelfAdjointEigenSolver<Mat4> es2(0.5 * (m + m.adjoint()),
                                            Eigen::EigenvaluesOnly);
    Eigen::Vector4d e = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    std::sort(e.data(), e.data() + 4, std::greater<double>());
    return std::max(0.0, e(0) - e(1) - e(2) - e(3));
}

double entanglement_of_formation(const Mat4& rho) {
    const double c = concurrence(rho);
    return binary_entropy(0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - c * c))));
}

double von_neumann_entropy_unchecked(const Eigen::MatrixXcd& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        double lam = es.eigenvalues()(i);
        if (lam < 0.0) lam = 0.0;  // clamp PSD drift
        if (lam > 0.0) s -= lam * std::log2(lam);
    }
    return s;
}

double von_neumann_entropy(const Eigen::MatrixXcd& rho) {
    if (std::abs(rho.trace().real() - 1.0) > 1e-10)
        throw std::domain_error("entropy input trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::domain_error("entropy input is not positive semidefinite");
    return von_neumann_entropy_unchecked(rho);
}

namespace {

// Re tr(A*B) for arbitrary 4x4 complex A,B.
double trace_prod_re(const Mat4& a, const Mat4& b) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            s += a(i, j).real() * b(j, i).real() - a(i, j).imag() * b(j, i).imag();
    return s;
}

// Characteristic-quartic roots of a matrix with real spectrum, via Newton's
// identities on the power sums.
Eigen::Vector4d real_spectrum_roots(const Mat4& m) {
    Mat4 m2;
    kern::active().matmul4(raw(m), raw(m), raw(m2));
    const double p1 = m.trace().real();
    const double p2 = m2.trace().real();
    const double p3 = trace_prod_re(m2, m);
    const double p4 = trace_prod_re(m2, m2);
    const double e1 = p1;
    const double e2 = (e1 * p1 - p2) / 2.0;
    const double e3 = (p3 - e1 * p2 + e2 * p1) / 3.0;
    const double e4 = (e1 * p3 - e2 * p2 + e3 * p1 - p4) / 4.0;
    double roots[4];
    detail::real_quartic_roots(-e1, e2, -e3, e4, roots);
    Eigen::Vector4d out(roots[0], roots[1], roots[2], roots[3]);
    std::sort(out.data(), out.data() + 4);
    return out;
}

}  // namespace

Eigen::Vector4d hermitian_eigenvalues_fast(const Mat4& h) {
    return real_spectrum_roots(h);
}

double min_eigenvalue_fast(const Mat4& h) { return real_spectrum_roots(h)(0); }

double concurrence_fast(const Mat4& rho) {
    Mat4 flipped, prod;
    kern::spinflip4(raw(rho), raw(flipped));
    kern::active().matmul4(raw(rho), raw(flipped), raw(prod));
    Eigen::Vector4d lam = real_spectrum_roots(prod).cwiseMax(0.0).cwiseSqrt();
    return std::max(0.0, lam(3) - lam(2) - lam(1) - lam(0));
}

double ppt_min_eigenvalue(const Mat4& rho) {
    // Partial transpose over the second qubit: swap the B indices.
    Mat4 pt;
    for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib)
            for (int ja = 0; ja < 2; ++ja)
                for (int jb = 0; jb < 2; ++jb)
                    pt(2 * ia + ib, 2 * ja + jb) = rho(2 * ia + jb, 2 * ja + ib);
    return min_eigenvalue(pt);
}

Purification purify(const Mat4& rho) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (rho + rho.adjoint()));
    Purification out;
    // Eigen returns ascending order; flip to descending.
    for (int i = 0; i < 4; ++i) {
        double lam = es.eigenvalues()(3 - i);
        if (lam < 0.0 && lam > -kEigClamp) lam = 0.0;
        out.lambda(i) = lam;
        out.phi.col(i) = es.eigenvectors().col(3 - i);
    }
    return out;
}

stats::ProbTable born_statistics(const Mat4& rho,
                                 const std::vector<Povm>& povms_a,
                                 const std::vector<Povm>& povms_b) {
    if (povms_a.empty() || povms_b.empty())
        throw std::domain_error("born_statistics: empty measurement list");
    const int nx = static_cast<int>(povms_a.size());
    const int ny = static_cast<int>(povms_b.size());
    const int ka = static_cast<int>(povms_a[0].elements.size());
    const int kb = static_cast<int>(povms_b[0].elements.size());
    for (const auto& m : povms_a)
        if (!m.valid(1e-9) || static_cast<int>(m.elements.size()) != ka)
            throw std::domain_error("born_statistics: invalid POVM for Alice");
    for (const auto& m : povms_b)
        if (!m.valid(1e-9) || static_cast<int>(m.elements.size()) != kb)
            throw std::domain_error("born_statistics: invalid POVM for Bob");

    auto table = stats::ProbTable::zeros(nx, ny, ka, kb);
    const auto& k = kern::active();
    Mat4 e;
    for (int x = 0; x < nx; ++x)
        for (int y = 0; y < ny; ++y)
            for (int a = 0; a < ka; ++a)
                for (int b = 0; b < kb; ++b) {
                    k.kron22(reinterpret_cast<const double*>(
                                 povms_a[x].elements[a].data()),
                             reinterpret_cast<const double*>(
                                 povms_b[y].elements[b].data()),
                             raw(e));
                    table.at(x, y, a, b) = k.herm_trace_dot4(raw(rho), raw(e));
                }
    return table;
}

}  // namespace dimcert::qmat
