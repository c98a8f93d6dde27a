#include "dimcert/qkd.hpp"

#include "dimcert/kernels.hpp"
#include "dimcert/stats.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace dimcert::qkd {

namespace {

using certify::ConstrainedFamily;
using certify::Model;
using certify::Status;
using qmat::Mat2;
using qmat::Mat3;
using qmat::Mat4;
using qmat::Vec3;
using qmat::cd;

constexpr double kGuard = 1e-6;
constexpr double kUnitSlack = 1e-9;
constexpr double kPsdGate = 1e-9;
constexpr double kRejectBase = 1e5;
constexpr double kInfeasibleMark = 1e6;
constexpr double kResidualTol = 1e-8;  // construction-exact paths

const double* raw(const Mat4& m) { return reinterpret_cast<const double*>(m.data()); }
double* raw(Mat4& m) { return reinterpret_cast<double*>(m.data()); }

double entropy_of(const Eigen::Vector4d& lam) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        if (lam(i) > 0.0) s -= lam(i) * std::log2(lam(i));
    return s;
}

// Shared chi evaluation; `fast` switches the conditional-state eigenvalue
// route (closed-form quartic vs robust solver).
double holevo_impl(const Mat4& rho_ab, const qmat::Povm& key, bool fast) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (rho_ab + rho_ab.adjoint()));
    Eigen::Vector4d lam = es.eigenvalues().cwiseMax(0.0);
    const Mat4& phi = es.eigenvectors();
    const double s_e = entropy_of(lam);
    const Eigen::Vector4d lam_sqrt = lam.cwiseSqrt();

    double cond = 0.0;
    Mat4 big, g;
    for (const Mat2& pi : key.elements) {
        kern::active().kron22(
            reinterpret_cast<const double*>(pi.data()),
            reinterpret_cast<const double*>(Mat2(Mat2::Identity()).data()),
            raw(big));
        g = phi.adjoint() * big * phi;
        double p_a = 0.0;
        for (int j = 0; j < 4; ++j) p_a += lam(j) * g(j, j).real();
        if (p_a <= 1e-14) continue;  // zero-probability outcomes drop out
        // (rho_E^a)_{jk} = sqrt(lam_j lam_k) <phi_k|Pi(x)1|phi_j> / p_a
        const Mat4 rho_a = (lam_sqrt.asDiagonal() * g.transpose() *
                            lam_sqrt.asDiagonal()) /
                           p_a;
        Eigen::Vector4d mu;
        if (fast) {
            mu = qmat::hermitian_eigenvalues_fast(rho_a).cwiseMax(0.0);
        } else {
            Eigen::SelfAdjointEigenSolver<Mat4> es2(
                0.5 * (rho_a + rho_a.adjoint()), Eigen::EigenvaluesOnly);
            mu = es2.eigenvalues().cwiseMax(0.0);
        }
        cond += p_a * entropy_of(mu);
    }
    return s_e - cond;
}

double holevo_fast(const Mat4& rho_ab, const qmat::Povm& key) {
    return holevo_impl(rho_ab, key, true);
}

struct AttackOutcome {
    bool feasible = false;
    double chi = 0.0;
    double psd_min = 0.0;
};

KeyRateResult finish_keyrate(const optim::MinimizeResult& mr, double q,
                             const Model& model, const AttackOutcome& ev,
                             double residual, const optim::OptimOptions& opts) {
    KeyRateResult r;
    r.q = q;
    r.holevo = ev.chi;
    r.r_raw = 1.0 - qmat::binary_entropy(q) - ev.chi;
    r.r = std::max(0.0, r.r_raw);
    r.model = model;
    r.residual = residual;
    r.psd_min = ev.psd_min;
    r.status = (ev.feasible && residual <= kResidualTol)
                   ? Status::POSITIVE_BOUND
                   : Status::INFEASIBLE_WITHIN_TOL;
    r.n_starts = opts.n_starts;
    r.seed = opts.seed;
    r.best_start = mr.best_start;
    r.total_evals = mr.total_evals;
    return r;
}

double model_residual(const Model& m, const stats::ProbTable& target) {
    const auto table =
        qmat::born_statistics(m.state.density(), m.povms_a, m.povms_b);
    return kern::active().max_abs_diff(table.p.data(), target.p.data(),
                                       target.p.size());
}

}  // namespace

double holevo(const Mat4& rho_ab, const qmat::Povm& key_povm) {
    if (std::abs(rho_ab.trace().real() - 1.0) > 1e-9)
        throw std::domain_error("holevo: state trace differs from 1");
    if (!key_povm.valid(1e-9))
        throw std::domain_error("holevo: invalid key POVM");
    return holevo_impl(rho_ab, key_povm, false);
}

ReferenceRates reference_rates(double q) {
    if (!(q >= 0.0 && q <= 0.5))
        throw std::domain_error("reference_rates: Q must lie in [0, 1/2]");
    ReferenceRates r;
    r.r_bb84 = 1.0 - 2.0 * qmat::binary_entropy(q);
    // 1 - H({1-3Q/2, Q/2, Q/2, Q/2})
    double h4 = 0.0;
    const double big = 1.0 - 1.5 * q, small = 0.5 * q;
    if (big > 0.0) h4 -= big * std::log2(big);
    if (small > 0.0) h4 -= 3.0 * small * std::log2(small);
    r.r_sixstate = 1.0 - h4;
    return r;
}

certify::Model sixstate_attack_model(double w) {
    Model m;
    m.state.t = Mat3::Zero();
    m.state.t(0, 0) = w;    // XX
    m.state.t(1, 1) = -w;   // YY
    m.state.t(2, 2) = 1.0;  // ZZ
    const Vec3 ax(1, 0, 0), ay(0, 1, 0), az(0, 0, 1);
    m.povms_a = {qmat::Povm::dichotomic(1.0, az), qmat::Povm::dichotomic(1.0, ax),
                 qmat::Povm::dichotomic(1.0, ay)};
    m.povms_b = {qmat::Povm::dichotomic(w, az), qmat::Povm::dichotomic(1.0, ax),
                 qmat::Povm::dichotomic(1.0, ay)};
    return m;
}

KeyRateResult certified_keyrate(ConstrainedFamily family, double w,
                                optim::OptimOptions opts) {
    const certify::ConstrainedParametrization par(family, w);
    const auto target = stats::generate(
        {family == ConstrainedFamily::SIXSTATE ? stats::Family::SIXSTATE
                                               : stats::Family::BB84,
         w});
    const double q = stats::qber(target);
    opts.bounds = par.box();
    if (opts.max_evals <= 0) opts.max_evals = 40000;

    static const Vec3 zaxis(0, 0, 1);
    auto objective = [&](std::span<const double> x, bool with_chi) -> double {
        const auto d = par.decode(x);
        if (!d) return kRejectBase;
        if (d->overflow > 0.0) return kRejectBase + d->overflow;
        const Mat4 rho = qmat::density_from_bloch(Vec3::Zero(), Vec3::Zero(), d->t);
        const double lam = qmat::min_eigenvalue_fast(rho);
        const double viol = std::max(0.0, -lam);
        const double pen = opts.psd_penalty * viol * viol;
        if (!with_chi) return pen;
        // Eve maximizes chi: minimize its negative. Penalized states can be
        // slightly unphysical; clamp chi into its information range.
        const auto key = qmat::Povm::dichotomic(d->meas.eta_a[0], zaxis);
        const double chi = std::clamp(holevo_fast(rho, key), -1.0, 2.0);
        return -chi + pen;
    };
    optim::Objective full = [&](std::span<const double> x) {
        return objective(x, true);
    };
    optim::Objective feas = [&](std::span<const double> x) {
        return objective(x, false);
    };

    auto robust_at = [&](std::span<const double> x) -> AttackOutcome {
        AttackOutcome ev;
        const auto d = par.decode(x);
        if (!d || d->overflow > 0.0) return ev;
        const Mat4 rho = qmat::density_from_bloch(Vec3::Zero(), Vec3::Zero(), d->t);
        ev.psd_min = qmat::min_eigenvalue(rho);
        ev.chi = holevo_impl(rho, qmat::Povm::dichotomic(d->meas.eta_a[0], zaxis),
                             false);
        ev.feasible = ev.psd_min >= -kPsdGate;
        return ev;
    };

    const auto mr = optim::multistart(opts, [&](int, optim::SplitRng& rng) {
        auto x0 = optim::sample_in_box(rng, opts.bounds);
        const long b_main = opts.max_evals * 7 / 10;
        auto r1 = optim::nelder_mead(full, std::move(x0), opts.bounds, b_main,
                                     opts.step_tol);
        auto r2 = optim::nelder_mead(feas, r1.x, opts.bounds,
                                     opts.max_evals - b_main, opts.step_tol);
        const auto ev = robust_at(r2.x);
        optim::LocalResult out;
        out.x = std::move(r2.x);
        out.f = ev.feasible ? -ev.chi : kInfeasibleMark - ev.psd_min;
        out.evals = r1.evals + r2.evals;
        out.converged = r2.converged;
        return out;
    });

    const auto ev = robust_at(mr.x_best);
    Model model;
    double residual = std::numeric_limits<double>::infinity();
    if (par.decode(mr.x_best)) {
        model = par.rebuild(mr.x_best);
        residual = model_residual(model, target);
    }
    return finish_keyrate(mr, q, model, ev, residual, opts);
}

namespace {

// Appendix-style noisy-BB84 attack space: POVM elements a1 + b.sigma with
// the derived state entries solved from the binarized statistics.
// 17 parameters: alpha1,beta1, alpha2,beta2,beta3, gamma1,delta1,
// gamma2,delta2,delta3, mAy, mBy, Txy, Tyy, Tzy, Tyx, Tyz.
struct NoisyDecoded {
    Vec3 m_a, m_b;
    Mat3 t;
    double a1, b1, a2, b2, b3;  // Alice POVM coefficients
    double g1, d1, g2, d2, d3;  // Bob POVM coefficients
    double overflow = 0.0;
    double povm_min_eig = 0.0;  // over all elements and their complements
};

struct NoisyLayout {
    double w, eps;
    stats::ProbTable target;  // binarized
    std::array<std::array<double, 2>, 2> joint_pp;  // observed P(+,+|x,y)
    double marg = 0.0;                              // P(+1|setting)
    optim::Box box;

    NoisyLayout(double w_, double eps_) : w(w_), eps(eps_) {
        target = stats::generate(
            {stats::Family::NOISY_BB84_BINARIZED, w, eps, eps});
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) joint_pp[x][y] = target.at(x, y, 0, 0);
        marg = 1.0 - eps / 2.0;
        box.lo = {0, -1, 0, -1, -1, 0, -1, 0, -1, -1, -1, -1, -1, -1, -1, -1, -1};
        box.hi = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    }

    bool decode(std::span<const double> x, NoisyDecoded& d) const {
        d.a1 = x[0]; d.b1 = x[1];
        d.a2 = x[2]; d.b2 = x[3]; d.b3 = x[4];
        d.g1 = x[5]; d.d1 = x[6];
        d.g2 = x[7]; d.d2 = x[8]; d.d3 = x[9];
        if (std::abs(d.b1) < kGuard || std::abs(d.b3) < kGuard ||
            std::abs(d.d1) < kGuard || std::abs(d.d3) < kGuard)
            return false;

        // Marginals pin the in-plane Bloch components...
        d.m_a(1) = x[10];
        d.m_b(1) = x[11];
        d.m_a(2) = (marg - d.a1) / d.b1;
        d.m_b(2) = (marg - d.g1) / d.d1;
        d.m_a(0) = (marg - d.a2 - d.b2 * d.m_a(2)) / d.b3;
        d.m_b(0) = (marg - d.g2 - d.d2 * d.m_b(2)) / d.d3;

        // ...and the P(+,+) entries pin the zx-block of T.
        d.t = Mat3::Zero();
        d.t(0, 1) = x[12];  // xy
        d.t(1, 1) = x[13];  // yy
        d.t(2, 1) = x[14];  // zy
        d.t(1, 0) = x[15];  // yx
        d.t(1, 2) = x[16];  // yz
        const double mAz = d.m_a(2), mBz = d.m_b(2);
        const double mAx = d.m_a(0), mBx = d.m_b(0);
        d.t(2, 2) = (joint_pp[0][0] - d.a1 * d.g1 - d.g1 * d.b1 * mAz -
                     d.a1 * d.d1 * mBz) /
                    (d.b1 * d.d1);
        d.t(2, 0) = ((joint_pp[0][1] - d.a1 * d.g2 - d.g2 * d.b1 * mAz -
                      d.a1 * (d.d3 * mBx + d.d2 * mBz)) /
                         d.b1 -
                     d.d2 * d.t(2, 2)) /
                    d.d3;
        d.t(0, 2) = ((joint_pp[1][0] - d.a2 * d.g1 -
                      d.g1 * (d.b3 * mAx + d.b2 * mAz) - d.a2 * d.d1 * mBz) /
                         d.d1 -
                     d.b2 * d.t(2, 2)) /
                    d.b3;
        d.t(0, 0) = ((joint_pp[1][1] - d.a2 * d.g2 -
                      d.g2 * (d.b3 * mAx + d.b2 * mAz) -
                      d.a2 * (d.d3 * mBx + d.d2 * mBz)) -
                     d.b3 * d.d2 * d.t(0, 2) - d.b2 * d.d3 * d.t(2, 0) -
                     d.b2 * d.d2 * d.t(2, 2)) /
                    (d.b3 * d.d3);

        double over = 0.0;
        for (int i = 0; i < 3; ++i) {
            over += std::max(0.0, std::abs(d.m_a(i)) - (1.0 + kUnitSlack));
            over += std::max(0.0, std::abs(d.m_b(i)) - (1.0 + kUnitSlack));
            for (int j = 0; j < 3; ++j)
                over += std::max(0.0, std::abs(d.t(i, j)) - (1.0 + kUnitSlack));
        }
        d.overflow = over;

        // Element PSD: eigenvalues are alpha +- |v| and (1-alpha) -+ |v|.
        auto elem_min = [](double alpha, double vx, double vz_) {
            const double v = std::sqrt(vx * vx + vz_ * vz_);
            return std::min(alpha - v, 1.0 - alpha - v);
        };
        d.povm_min_eig =
            std::min({elem_min(d.a1, 0.0, d.b1), elem_min(d.a2, d.b3, d.b2),
                      elem_min(d.g1, 0.0, d.d1), elem_min(d.g2, d.d3, d.d2)});
        return true;
    }

    Model rebuild(const NoisyDecoded& d) const {
        auto elem = [](double alpha, double vx, double vz) {
            Mat2 e;
            e << alpha + vz, vx, vx, alpha - vz;
            return e;
        };
        auto povm = [&](double alpha, double vx, double vz) {
            qmat::Povm p;
            const Mat2 plus = elem(alpha, vx, vz);
            p.elements = {plus, Mat2::Identity() - plus};
            return p;
        };
        Model m;
        m.state.m_a = d.m_a;
        m.state.m_b = d.m_b;
        m.state.t = d.t;
        m.povms_a = {povm(d.a1, 0.0, d.b1), povm(d.a2, d.b3, d.b2)};
        m.povms_b = {povm(d.g1, 0.0, d.d1), povm(d.g2, d.d3, d.d2)};
        return m;
    }
};

}  // namespace

KeyRateResult noisy_bb84_keyrate(double w, double eps,
                                 optim::OptimOptions opts) {
    if (!(w >= 0.0 && w <= 1.0))
        throw std::domain_error("noisy_bb84_keyrate: W must lie in [0,1]");
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::domain_error("noisy_bb84_keyrate: eps must lie in (0,1]");
    const NoisyLayout lay(w, eps);
    const double q = stats::qber(lay.target);
    opts.bounds = lay.box;
    if (opts.max_evals <= 0) opts.max_evals = 40000;

    auto objective = [&](std::span<const double> x, bool with_chi) -> double {
        NoisyDecoded d;
        if (!lay.decode(x, d)) return kRejectBase;
        if (d.overflow > 0.0) return kRejectBase + d.overflow;
        const Mat4 rho = qmat::density_from_bloch(d.m_a, d.m_b, d.t);
        const double lam = qmat::min_eigenvalue_fast(rho);
        const double sviol = std::max(0.0, -lam);
        const double pviol = std::max(0.0, -d.povm_min_eig);
        const double pen =
            opts.psd_penalty * (sviol * sviol + pviol * pviol);
        if (!with_chi) return pen;
        qmat::Povm key;
        const Mat2 plus = (Mat2() << d.a1 + d.b1, 0, 0, d.a1 - d.b1).finished();
        key.elements = {plus, Mat2::Identity() - plus};
        const double chi = std::clamp(holevo_fast(rho, key), -1.0, 2.0);
        return -chi + pen;
    };
    optim::Objective full = [&](std::span<const double> x) {
        return objective(x, true);
    };
    optim::Objective feas = [&](std::span<const double> x) {
        return objective(x, false);
    };

    struct NoisyFinal {
        AttackOutcome ev;
        bool decodable = false;
    };
    auto robust_at = [&](std::span<const double> x,
                         NoisyDecoded& d) -> NoisyFinal {
        NoisyFinal fin;
        if (!lay.decode(x, d) || d.overflow > 0.0) return fin;
        fin.decodable = true;
        const Mat4 rho = qmat::density_from_bloch(d.m_a, d.m_b, d.t);
        qmat::Povm key;
        const Mat2 plus = (Mat2() << d.a1 + d.b1, 0, 0, d.a1 - d.b1).finished();
        key.elements = {plus, Mat2::Identity() - plus};
        fin.ev.chi = holevo_impl(rho, key, false);
        fin.ev.psd_min = std::min(qmat::min_eigenvalue(rho), d.povm_min_eig);
        fin.ev.feasible = fin.ev.psd_min >= -kPsdGate;
        return fin;
    };

    const auto mr = optim::multistart(opts, [&](int, optim::SplitRng& rng) {
        auto x0 = optim::sample_in_box(rng, opts.bounds);
        const long b_main = opts.max_evals * 7 / 10;
        auto r1 = optim::nelder_mead(full, std::move(x0), opts.bounds, b_main,
                                     opts.step_tol);
        auto r2 = optim::nelder_mead(feas, r1.x, opts.bounds,
                                     opts.max_evals - b_main, opts.step_tol);
        NoisyDecoded d;
        const auto fin = robust_at(r2.x, d);
        optim::LocalResult out;
        out.x = std::move(r2.x);
        out.f = fin.ev.feasible ? -fin.ev.chi
                                : kInfeasibleMark - fin.ev.psd_min;
        out.evals = r1.evals + r2.evals;
        out.converged = r2.converged;
        return out;
    });

    NoisyDecoded d;
    const auto fin = robust_at(mr.x_best, d);
    Model model;
    double residual = std::numeric_limits<double>::infinity();
    if (fin.decodable) {
        model = lay.rebuild(d);
        residual = model_residual(model, lay.target);
    }
    auto result = finish_keyrate(mr, q, model, fin.ev, residual, opts);
    result.note =
        "attack model: Eve holds the purification but no record of "
        "no-click rounds and cannot add channel loss";
    return result;
}

}  // namespace dimcert::qkd
