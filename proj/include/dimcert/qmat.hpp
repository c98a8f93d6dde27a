#pragma once

#include <Eigen/Dense>

#include <vector>

// Exact small-dimension quantum linear algebra: two-qubit states in Bloch
// form, POVMs, concurrence and entanglement of formation, entropies,
// purifications and the Born rule. Everything here is pure and reentrant.

namespace dimcert::stats {
struct ProbTable;
}

namespace dimcert::qmat {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using cd = std::complex<double>;

// Axis order is (x,y,z) throughout; T(i,j) = <sigma_i (x) sigma_j>.
struct TwoQubitState {
    Vec3 m_a = Vec3::Zero();
    Vec3 m_b = Vec3::Zero();
    Mat3 t = Mat3::Zero();

    Mat4 density() const;
    static TwoQubitState from_density(const Mat4& rho);
};

// One measurement setting: positive elements summing to identity.
struct Povm {
    std::vector<Mat2> elements;

    // (1 +- eta n.sigma)/2 ordered [+1, -1]; |n| must be 1.
    static Povm dichotomic(double eta, const Vec3& axis);
    // min element eigenvalue and completeness defect, for validation
    double min_eigenvalue() const;
    double completeness_error() const;
    bool valid(double tol = 1e-12) const;
};

struct Purification {
    Eigen::Vector4d lambda;  // descending, sums to 1
    Mat4 phi;                // eigenvectors as columns, same order
};

// Named states and operators.
Mat2 pauli(int axis);  // 0=x, 1=y, 2=z
Mat4 phi_plus();       // |Phi+><Phi+|
Mat4 werner(double w);
Eigen::Vector4cd pure_theta(double theta);  // cos t |00> + sin t |11>
std::vector<Mat2> sic_povm();               // the four SIC elements

double binary_entropy(double x);

Mat4 density_from_bloch(const Vec3& m_a, const Vec3& m_b, const Mat3& t);

// Minimum eigenvalue of a Hermitian 4x4 (clamped symmetrization applied).
double min_eigenvalue(const Mat4& h);

// Wootters concurrence. The checked form validates PSD/trace preconditions
// (throws std::domain_error); the unchecked form is the optimizer hot path
// and clamps small negative spectra instead.
double concurrence(const Mat4& rho);
double concurrence_unchecked(const Mat4& rho);
// Eq.-style cross-check route via sqrt(rho): eigenvalues of
// sqrt(sqrt(rho) rho~ sqrt(rho)). Agrees with concurrence() to 1e-10.
double concurrence_sqrt_form(const Mat4& rho);

double entanglement_of_formation(const Mat4& rho);

double von_neumann_entropy(const Eigen::MatrixXcd& rho);
double von_neumann_entropy_unchecked(const Eigen::MatrixXcd& rho);

// Minimum eigenvalue of the partial transpose over the second qubit.
// Negative iff entangled (two qubits): the independent NPT oracle.
double ppt_min_eigenvalue(const Mat4& rho);

// Optimizer-grade fast spectra via the closed-form characteristic quartic:
// ~1e-9 on separated spectra, degrading to ~1e-6 at multiple roots.
// Reported quantities are always recomputed with the robust routes above;
// these only steer the search.
Eigen::Vector4d hermitian_eigenvalues_fast(const Mat4& h);  // ascending
double min_eigenvalue_fast(const Mat4& h);
double concurrence_fast(const Mat4& rho);

Purification purify(const Mat4& rho);

stats::ProbTable born_statistics(const Mat4& rho,
                                 const std::vector<Povm>& povms_a,
                                 const std::vector<Povm>& povms_b);

}  // namespace dimcert::qmat
