#pragma once

#include "dimcert/optim.hpp"
#include "dimcert/qmat.hpp"
#include "dimcert/stats.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

// Minimum concurrence over all two-qubit models (state + POVMs per setting)
// reproducing a given statistics table. Two routes:
//   - constrained: for the BB84/six-state families with unbiased marginals,
//     the correlation conditions eliminate the state analytically (the T
//     matrix solves a small linear system in the measurement parameters);
//   - generic: factorized state/POVM parametrization with a quadratic
//     statistics penalty, for arbitrary tables.
// Both are multi-start local searches: the returned bound is the best model
// found, an upper bound on the true minimum, corroborated by the analytic
// anchors (W=1 self-testing, witness thresholds) in the acceptance suite.

namespace dimcert::certify {

enum class Status {
    SEPARABLE_MODEL_FOUND,
    POSITIVE_BOUND,
    INFEASIBLE_WITHIN_TOL,
};
const char* status_name(Status s);

// Bounds below this are reported as an exact separable model.
constexpr double kCTol = 1e-4;

enum class ConstrainedFamily { BB84, SIXSTATE };

// Measurement parametrization of the constrained paths, after gauge fixing
// (first direction = z, second in the zx-plane, third free):
//   A_0 = eta0 * z,  A_1 = eta1 * (c x + s z),
//   A_2 = eta2 * (E d x + D y + E e z)
// with (c,s), (D,E), (d,e) on the unit circle, stored as angles.
struct SixStateMeasParams {
    std::array<double, 3> eta_a{1.0, 1.0, 1.0};
    std::array<double, 3> eta_b{1.0, 1.0, 1.0};
    double ang_a1 = 0.0, ang_b1 = 0.0;  // (c,s)
    double ang_a2 = 0.0, ang_b2 = 0.0;  // (D,E)
    double ang_a3 = 0.0, ang_b3 = 0.0;  // (d,e)

    double c_a() const { return std::cos(ang_a1); }
    double s_a() const { return std::sin(ang_a1); }
    double c_b() const { return std::cos(ang_b1); }
    double s_b() const { return std::sin(ang_b1); }
    double dd_a() const { return std::cos(ang_a2); }
    double ee_a() const { return std::sin(ang_a2); }
    double dd_b() const { return std::cos(ang_b2); }
    double ee_b() const { return std::sin(ang_b2); }

    // Unit measurement direction (axis order x,y,z); setting in {0,1,2}.
    qmat::Vec3 axis_a(int setting) const;
    qmat::Vec3 axis_b(int setting) const;
};

struct InfeasibleParams : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solve the nine raw correlation conditions
//   eta_Ax eta_By (n_Ax . T n_By) = {W, W, -W on the diagonal; 0 off}
// for the full T. Throws std::domain_error on the |c|,|D| >= 1e-6 guards and
// InfeasibleParams when some |T_ij| > 1 + 1e-9.
qmat::Mat3 t_matrix_sixstate(double w, const SixStateMeasParams& p);

// Same for the two-setting case: only the zx-block is determined.
struct Bb84TEntries {
    double t_zz = 0.0, t_zx = 0.0, t_xz = 0.0, t_xx = 0.0;
};
Bb84TEntries t_matrix_bb84(double w, const SixStateMeasParams& p);

struct Model {
    qmat::TwoQubitState state;
    std::vector<qmat::Povm> povms_a, povms_b;
};

struct CertResult {
    double bound = 0.0;      // 0 when bound_raw <= kCTol
    double bound_raw = 0.0;  // concurrence of the returned model
    Model model;
    double residual = 0.0;  // sup-norm statistics mismatch of the model
    double psd_min = 0.0;   // min eigenvalue of the model state
    Status status = Status::INFEASIBLE_WITHIN_TOL;
    int n_starts = 0;
    std::uint64_t seed = 0;
    int best_start = -1;
    long total_evals = 0;
    std::string note;
};

// Parameter-vector view of the constrained search space, shared with the
// key-rate layer: 12 reals for six-state (6 etas + 6 angles), 11 for BB84
// (4 etas + 2 angles + the 5 free T entries).
class ConstrainedParametrization {
  public:
    ConstrainedParametrization(ConstrainedFamily family, double w);

    int dim() const { return static_cast<int>(box_.dim()); }
    const optim::Box& box() const { return box_; }
    int n_settings() const { return family_ == ConstrainedFamily::SIXSTATE ? 3 : 2; }
    ConstrainedFamily family() const { return family_; }
    double w() const { return w_; }

    struct Decoded {
        SixStateMeasParams meas;
        qmat::Mat3 t;
        double overflow = 0.0;  // total |T| unit-box violation, 0 if none
    };
    // nullopt on the |c|,|D| guard; overflow reported, never thrown.
    std::optional<Decoded> decode(std::span<const double> x) const;
    Model rebuild(std::span<const double> x) const;

  private:
    ConstrainedFamily family_;
    double w_;
    optim::Box box_;
};

CertResult certify_constrained(ConstrainedFamily family, double w,
                               optim::OptimOptions opts);

// Arbitrary tables; POVMs with up to 4 outcomes are expected (more are
// accepted with a note). residual gate: opts.residual_tol (default 1e-6).
CertResult certify_generic(const stats::ProbTable& p,
                           optim::OptimOptions opts);

// The W=1 forcing argument carried out symbolically: |T_zz| <= 1 pins the
// etas to 1 and T to diag(1,-1,1), i.e. the state is |Phi+><Phi+|. No
// numerical search involved.
struct SelfTest {
    qmat::Mat4 state;
    std::vector<std::string> forced_eta_names;
    std::vector<double> forced_etas;  // all 1.0
    qmat::Mat3 forced_t;
    std::string note;  // six-state: measurement 2 forced to sigma_y
};
SelfTest selftest_w1(ConstrainedFamily family);

}  // namespace dimcert::certify
