#include "dimcert/certify.hpp"

#include "dimcert/kernels.hpp"

#include <Eigen/LU>

#include <cmath>
#include <cstring>
#include <limits>

namespace dimcert::certify {

namespace {

using qmat::Mat2;
using qmat::Mat3;
using qmat::Mat4;
using qmat::Vec3;

constexpr double kGuard = 1e-6;       // |c|,|D| floor in the T-solve
constexpr double kUnitSlack = 1e-9;   // |T_ij| <= 1 + slack
constexpr double kPsdGate = 1e-9;     // accepted min eigenvalue of the state
constexpr double kRejectBase = 1e5;   // above any feasible objective value
constexpr double kInfeasibleMark = 1e6;

const double* raw(const Mat4& m) { return reinterpret_cast<const double*>(m.data()); }
double* raw(Mat4& m) { return reinterpret_cast<double*>(m.data()); }

// Raw correlation-condition solve: rows of A/B are eta * direction, the
// diagonal targets are (W, W, -W). No guards here.
Mat3 solve_t_full(double w, const SixStateMeasParams& p) {
    Mat3 a, b;
    for (int s = 0; s < 3; ++s) {
        a.row(s) = p.eta_a[s] * p.axis_a(s).transpose();
        b.row(s) = p.eta_b[s] * p.axis_b(s).transpose();
    }
    Mat3 wmat = Mat3::Zero();
    wmat.diagonal() << w, w, -w;
    // A T B^T = W  =>  T = A^-1 W B^-T
    const Mat3 x = a.partialPivLu().solve(wmat);
    return b.partialPivLu().solve(x.transpose()).transpose();
}

// Two-setting case: the zx-block alone is determined.
Bb84TEntries solve_t_bb84(double w, const SixStateMeasParams& p) {
    Eigen::Matrix2d a, b;
    // component order (x,z)
    a << 0.0, p.eta_a[0], p.eta_a[1] * p.c_a(), p.eta_a[1] * p.s_a();
    b << 0.0, p.eta_b[0], p.eta_b[1] * p.c_b(), p.eta_b[1] * p.s_b();
    const Eigen::Matrix2d wmat = w * Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d x = a.partialPivLu().solve(wmat);
    const Eigen::Matrix2d t = b.partialPivLu()
                                  .solve(x.transpose())
                                  .transpose();
    Bb84TEntries out;
    out.t_xx = t(0, 0);
    out.t_xz = t(0, 1);
    out.t_zx = t(1, 0);
    out.t_zz = t(1, 1);
    return out;
}

double unit_overflow(const Mat3& t) {
    double v = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            v += std::max(0.0, std::abs(t(i, j)) - (1.0 + kUnitSlack));
    return v;
}

struct RobustEval {
    bool feasible = false;
    double conc = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    double psd_min = 0.0;
};

// Residual of a rebuilt model against the target table, sup norm.
double model_residual(const Model& m, const stats::ProbTable& target) {
    const auto table =
        qmat::born_statistics(m.state.density(), m.povms_a, m.povms_b);
    return kern::active().max_abs_diff(table.p.data(), target.p.data(),
                                       target.p.size());
}

CertResult finish(const optim::MinimizeResult& mr, const Model& model,
                  const RobustEval& ev, const optim::OptimOptions& opts,
                  double residual_tol) {
    CertResult r;
    r.model = model;
    r.bound_raw = ev.conc;
    r.residual = ev.residual;
    r.psd_min = ev.psd_min;
    r.n_starts = opts.n_starts;
    r.seed = opts.seed;
    r.best_start = mr.best_start;
    r.total_evals = mr.total_evals;
    const bool ok = ev.residual <= residual_tol && ev.psd_min >= -kPsdGate;
    if (!ok) {
        r.status = Status::INFEASIBLE_WITHIN_TOL;
        r.bound = ev.conc;
    } else if (ev.conc <= kCTol) {
        r.status = Status::SEPARABLE_MODEL_FOUND;
        r.bound = 0.0;
    } else {
        r.status = Status::POSITIVE_BOUND;
        r.bound = ev.conc;
    }
    return r;
}

}  // namespace

const char* status_name(Status s) {
    switch (s) {
        case Status::SEPARABLE_MODEL_FOUND: return "SEPARABLE_MODEL_FOUND";
        case Status::POSITIVE_BOUND: return "POSITIVE_BOUND";
        case Status::INFEASIBLE_WITHIN_TOL: return "INFEASIBLE_WITHIN_TOL";
    }
    return "?";
}

Vec3 SixStateMeasParams::axis_a(int setting) const {
    switch (setting) {
        case 0: return Vec3(0, 0, 1);
        case 1: return Vec3(c_a(), 0, s_a());
        default: {
            const double d = std::cos(ang_a3), e = std::sin(ang_a3);
            return Vec3(ee_a() * d, dd_a(), ee_a() * e);
        }
    }
}

Vec3 SixStateMeasParams::axis_b(int setting) const {
    switch (setting) {
        case 0: return Vec3(0, 0, 1);
        case 1: return Vec3(c_b(), 0, s_b());
        default: {
            const double d = std::cos(ang_b3), e = std::sin(ang_b3);
            return Vec3(ee_b() * d, dd_b(), ee_b() * e);
        }
    }
}

Mat3 t_matrix_sixstate(double w, const SixStateMeasParams& p) {
    if (std::abs(p.c_a()) < kGuard || std::abs(p.c_b()) < kGuard ||
        std::abs(p.dd_a()) < kGuard || std::abs(p.dd_b()) < kGuard)
        throw std::domain_error("t_matrix_sixstate: |c|,|D| guard violated");
    for (double e : p.eta_a)
        if (!(e > 0.0 && e <= 1.0))
            throw std::domain_error("t_matrix_sixstate: eta out of (0,1]");
    for (double e : p.eta_b)
        if (!(e > 0.0 && e <= 1.0))
            throw std::domain_error("t_matrix_sixstate: eta out of (0,1]");
    const Mat3 t = solve_t_full(w, p);
    if (unit_overflow(t) > 0.0)
        throw InfeasibleParams("t_matrix_sixstate: |T| exceeds the unit box");
    return t;
}

Bb84TEntries t_matrix_bb84(double w, const SixStateMeasParams& p) {
    if (std::abs(p.c_a()) < kGuard || std::abs(p.c_b()) < kGuard)
        throw std::domain_error("t_matrix_bb84: |c| guard violated");
    for (int s = 0; s < 2; ++s)
        if (!(p.eta_a[s] > 0.0 && p.eta_a[s] <= 1.0) ||
            !(p.eta_b[s] > 0.0 && p.eta_b[s] <= 1.0))
            throw std::domain_error("t_matrix_bb84: eta out of (0,1]");
    const auto t = solve_t_bb84(w, p);
    const double over =
        std::max({std::abs(t.t_zz), std::abs(t.t_zx), std::abs(t.t_xz),
                  std::abs(t.t_xx)});
    if (over > 1.0 + kUnitSlack)
        throw InfeasibleParams("t_matrix_bb84: |T| exceeds the unit box");
    return t;
}

ConstrainedParametrization::ConstrainedParametrization(ConstrainedFamily family,
                                                       double w)
    : family_(family), w_(w) {
    if (!(w >= 0.0 && w <= 1.0))
        throw std::domain_error("visibility W must lie in [0,1]");
    const double two_pi = 2.0 * M_PI;
    if (family == ConstrainedFamily::SIXSTATE) {
        // 6 etas, then angles a1,b1,a2,b2,a3,b3
        box_.lo = {1e-3, 1e-3, 1e-3, 1e-3, 1e-3, 1e-3, 0, 0, 0, 0, 0, 0};
        box_.hi = {1, 1, 1, 1, 1, 1, two_pi, two_pi, two_pi, two_pi, two_pi, two_pi};
    } else {
        // etas a0,a1,b0,b1; angles a1,b1; free T: zy, yz, xy, yx, yy
        box_.lo = {1e-3, 1e-3, 1e-3, 1e-3, 0, 0, -1, -1, -1, -1, -1};
        box_.hi = {1, 1, 1, 1, two_pi, two_pi, 1, 1, 1, 1, 1};
    }
}

std::optional<ConstrainedParametrization::Decoded>
ConstrainedParametrization::decode(std::span<const double> x) const {
    Decoded d;
    if (family_ == ConstrainedFamily::SIXSTATE) {
        for (int i = 0; i < 3; ++i) {
            d.meas.eta_a[i] = x[i];
            d.meas.eta_b[i] = x[3 + i];
        }
        d.meas.ang_a1 = x[6];
        d.meas.ang_b1 = x[7];
        d.meas.ang_a2 = x[8];
        d.meas.ang_b2 = x[9];
        d.meas.ang_a3 = x[10];
        d.meas.ang_b3 = x[11];
        if (std::abs(d.meas.c_a()) < kGuard || std::abs(d.meas.c_b()) < kGuard ||
            std::abs(d.meas.dd_a()) < kGuard || std::abs(d.meas.dd_b()) < kGuard)
            return std::nullopt;
        d.t = solve_t_full(w_, d.meas);
        d.overflow = unit_overflow(d.t);
    } else {
        d.meas.eta_a = {x[0], x[1], 1.0};
        d.meas.eta_b = {x[2], x[3], 1.0};
        d.meas.ang_a1 = x[4];
        d.meas.ang_b1 = x[5];
        if (std::abs(d.meas.c_a()) < kGuard || std::abs(d.meas.c_b()) < kGuard)
            return std::nullopt;
        const auto zx = solve_t_bb84(w_, d.meas);
        d.t = Mat3::Zero();
        d.t(0, 0) = zx.t_xx;
        d.t(0, 2) = zx.t_xz;
        d.t(2, 0) = zx.t_zx;
        d.t(2, 2) = zx.t_zz;
        d.t(2, 1) = x[6];   // zy
        d.t(1, 2) = x[7];   // yz
        d.t(0, 1) = x[8];   // xy
        d.t(1, 0) = x[9];   // yx
        d.t(1, 1) = x[10];  // yy
        d.overflow = unit_overflow(d.t);
    }
    return d;
}

Model ConstrainedParametrization::rebuild(std::span<const double> x) const {
    const auto d = decode(x);
    if (!d) throw std::domain_error("constrained rebuild hit a guard");
    Model m;
    m.state.t = d->t;
    for (int s = 0; s < n_settings(); ++s) {
        m.povms_a.push_back(
            qmat::Povm::dichotomic(d->meas.eta_a[s], d->meas.axis_a(s)));
        m.povms_b.push_back(
            qmat::Povm::dichotomic(d->meas.eta_b[s], d->meas.axis_b(s)));
    }
    return m;
}

CertResult certify_constrained(ConstrainedFamily family, double w,
                               optim::OptimOptions opts) {
    const ConstrainedParametrization par(family, w);
    const auto target = stats::generate(
        {family == ConstrainedFamily::SIXSTATE ? stats::Family::SIXSTATE
                                               : stats::Family::BB84,
         w});
    constexpr double residual_tol = 1e-8;  // construction-exact path
    opts.bounds = par.box();
    if (opts.max_evals <= 0) opts.max_evals = 60000;

    static const Vec3 kZero = Vec3::Zero();
    auto objective = [&par, &opts](std::span<const double> x,
                                   bool with_conc) -> double {
        const auto d = par.decode(x);
        if (!d) return kRejectBase;
        if (d->overflow > 0.0) return kRejectBase + d->overflow;
        Mat4 rho;
        kern::bloch_density(kZero.data(), kZero.data(), d->t.data(), raw(rho));
        const double lam = qmat::min_eigenvalue_fast(rho);
        const double viol = std::max(0.0, -lam);
        const double pen = opts.psd_penalty * viol * viol;
        return (with_conc ? qmat::concurrence_fast(rho) : 0.0) + pen;
    };
    optim::Objective full = [&](std::span<const double> x) {
        return objective(x, true);
    };
    optim::Objective feas = [&](std::span<const double> x) {
        return objective(x, false);
    };

    auto robust_at = [&](std::span<const double> x) -> RobustEval {
        RobustEval ev;
        const auto d = par.decode(x);
        if (!d || d->overflow > 0.0) return ev;
        const Mat4 rho = qmat::density_from_bloch(Vec3::Zero(), Vec3::Zero(), d->t);
        ev.psd_min = qmat::min_eigenvalue(rho);
        ev.conc = qmat::concurrence_unchecked(rho);
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
        out.f = ev.feasible ? ev.conc : kInfeasibleMark - ev.psd_min;
        out.evals = r1.evals + r2.evals;
        out.converged = r2.converged;
        return out;
    });

    const Model model = par.rebuild(mr.x_best);
    RobustEval ev = robust_at(mr.x_best);
    ev.residual = model_residual(model, target);
    return finish(mr, model, ev, opts, residual_tol);
}

namespace {

// ---- generic path -------------------------------------------------------

struct GenericLayout {
    int nx, ny, ka, kb;
    int dim;
    optim::Box box;

    explicit GenericLayout(const stats::ProbTable& t)
        : nx(t.nx), ny(t.ny), ka(t.ka), kb(t.kb) {
        dim = 32 + 4 * (nx * ka + ny * kb);
        box.lo.assign(dim, -1.0);
        box.hi.assign(dim, 1.0);
        // POVM factor diagonals live in [0,1].
        for (int i = 32; i < dim; i += 4) {
            box.lo[i] = 0.0;
            box.lo[i + 1] = 0.0;
        }
    }

    // factor parameters of element a of setting x on the given party
    int offset(bool party_b, int x, int a) const {
        const int base = 32 + (party_b ? 4 * nx * ka : 0);
        return base + 4 * ((party_b ? x * kb : x * ka) + a);
    }
};

struct GenericScratch {
    Mat4 state_factor, rho, kron;
    std::vector<Mat2> factors;
    std::vector<qmat::Povm> povms_a, povms_b;
    std::vector<double> model_p;
};

// Decode parameters into a model; false on a rejected point.
bool build_generic(const GenericLayout& lay, std::span<const double> x,
                   GenericScratch& s) {
    std::memcpy(s.state_factor.data(), x.data(), 32 * sizeof(double));
    kern::active().gram4(raw(s.state_factor), raw(s.rho));
    const double tr = s.rho.trace().real();
    if (!(tr > 1e-14)) return false;
    s.rho /= tr;

    auto build_party = [&](bool party_b, int n_set, int k,
                           std::vector<qmat::Povm>& out) {
        out.resize(n_set);
        for (int xs = 0; xs < n_set; ++xs) {
            s.factors.resize(k);
            for (int a = 0; a < k; ++a) {
                const double* q = x.data() + lay.offset(party_b, xs, a);
                Mat2& l = s.factors[a];
                l(0, 0) = q[0];
                l(0, 1) = 0.0;
                l(1, 0) = qmat::cd(q[2], q[3]);
                l(1, 1) = q[1];
            }
            if (!optim::try_povm_from_factors(s.factors, out[xs])) return false;
        }
        return true;
    };
    return build_party(false, lay.nx, lay.ka, s.povms_a) &&
           build_party(true, lay.ny, lay.kb, s.povms_b);
}

// Probabilities of the decoded model, same flat layout as the table.
void model_probabilities(const GenericLayout& lay, GenericScratch& s) {
    const auto& k = kern::active();
    s.model_p.resize(static_cast<std::size_t>(lay.nx) * lay.ny * lay.ka * lay.kb);
    std::size_t idx = 0;
    for (int xs = 0; xs < lay.nx; ++xs)
        for (int ys = 0; ys < lay.ny; ++ys)
            for (int a = 0; a < lay.ka; ++a)
                for (int b = 0; b < lay.kb; ++b) {
                    k.kron22(reinterpret_cast<const double*>(
                                 s.povms_a[xs].elements[a].data()),
                             reinterpret_cast<const double*>(
                                 s.povms_b[ys].elements[b].data()),
                             raw(s.kron));
                    s.model_p[idx++] = k.herm_trace_dot4(raw(s.rho), raw(s.kron));
                }
}

}  // namespace

CertResult certify_generic(const stats::ProbTable& p, optim::OptimOptions opts) {
    const auto rep = stats::validate(p);
    if (!rep.nonneg || !rep.normalized)
        throw std::domain_error("certify_generic: table is not a distribution");
    const GenericLayout lay(p);
    opts.bounds = lay.box;
    if (opts.max_evals <= 0) opts.max_evals = 60000;
    const double mu = opts.stat_penalty;

    auto objective = [&](std::span<const double> x, GenericScratch& s,
                         bool with_conc) -> double {
        if (!build_generic(lay, x, s)) return kRejectBase;
        model_probabilities(lay, s);
        const double d2 = kern::active().sumsq_diff(s.model_p.data(),
                                                    p.p.data(), p.p.size());
        return (with_conc ? qmat::concurrence_fast(s.rho) : 0.0) + mu * d2;
    };

    struct Final {
        RobustEval ev;
        bool decodable = false;
    };
    auto robust_at = [&](std::span<const double> x, GenericScratch& s) -> Final {
        Final f;
        if (!build_generic(lay, x, s)) return f;
        f.decodable = true;
        model_probabilities(lay, s);
        f.ev.residual = kern::active().max_abs_diff(s.model_p.data(),
                                                    p.p.data(), p.p.size());
        f.ev.psd_min = qmat::min_eigenvalue(s.rho);
        f.ev.conc = qmat::concurrence_unchecked(s.rho);
        f.ev.feasible =
            f.ev.residual <= opts.residual_tol && f.ev.psd_min >= -kPsdGate;
        return f;
    };

    const auto mr = optim::multistart(opts, [&](int, optim::SplitRng& rng) {
        GenericScratch s;
        optim::Objective full = [&](std::span<const double> x) {
            return objective(x, s, true);
        };
        optim::Objective feas = [&](std::span<const double> x) {
            return objective(x, s, false);
        };
        auto x0 = optim::sample_in_box(rng, opts.bounds);
        const long b_feas = opts.max_evals / 4;
        const long b_main = opts.max_evals / 2;
        const long b_pol = opts.max_evals - b_feas - b_main;
        auto r1 = optim::nelder_mead(feas, std::move(x0), opts.bounds, b_feas,
                                     opts.step_tol);
        auto r2 = optim::nelder_mead(full, r1.x, opts.bounds, b_main, opts.step_tol);
        auto r3 = optim::nelder_mead(feas, r2.x, opts.bounds, b_pol, opts.step_tol);
        const auto fin = robust_at(r3.x, s);
        optim::LocalResult out;
        out.x = std::move(r3.x);
        out.f = fin.ev.feasible ? fin.ev.conc : kInfeasibleMark + fin.ev.residual;
        out.evals = r1.evals + r2.evals + r3.evals;
        out.converged = r3.converged;
        return out;
    });

    GenericScratch s;
    const auto fin = robust_at(mr.x_best, s);
    Model model;
    if (fin.decodable) {
        model.state = qmat::TwoQubitState::from_density(s.rho);
        model.povms_a = s.povms_a;
        model.povms_b = s.povms_b;
    }
    auto result = finish(mr, model, fin.ev, opts, opts.residual_tol);
    if (p.ka > 4 || p.kb > 4)
        result.note = "more than 4 outcomes per setting: extremal qubit POVMs "
                      "need at most 4";
    return result;
}

SelfTest selftest_w1(ConstrainedFamily family) {
    SelfTest s;
    // The diagonal condition for the key pair reads eta_A0*eta_B0*T_zz = 1.
    // |T_zz| <= 1 and eta <= 1 force eta_A0 = eta_B0 = 1 and T_zz = 1
    // exactly; positivity then kills the whole z row/column, the second
    // diagonal condition repeats the argument for x, and tr(rho ZZ) =
    // tr(rho XX) = 1 leaves the single state with T_yy = -1.
    const double t_zz = 1.0;
    const double eta_a0 = 1.0 / t_zz, eta_b0 = 1.0 / t_zz;
    const double t_xx = 1.0;
    const double eta_a1 = 1.0 / t_xx, eta_b1 = 1.0 / t_xx;
    const double t_yy = -1.0;

    s.forced_t = qmat::Mat3::Zero();
    s.forced_t(0, 0) = t_xx;
    s.forced_t(1, 1) = t_yy;
    s.forced_t(2, 2) = t_zz;
    s.state = qmat::density_from_bloch(qmat::Vec3::Zero(), qmat::Vec3::Zero(),
                                       s.forced_t);
    s.forced_eta_names = {"eta_A0", "eta_B0", "eta_A1", "eta_B1"};
    s.forced_etas = {eta_a0, eta_b0, eta_a1, eta_b1};
    if (family == ConstrainedFamily::SIXSTATE) {
        // The third diagonal condition saturates |E_A E_B (d.d + e.e) -
        // D_A D_B| <= 1 at -1: both etas 1, E = 0, D_A = D_B = +-1.
        s.forced_eta_names.insert(s.forced_eta_names.end(),
                                  {"eta_A2", "eta_B2"});
        s.forced_etas.insert(s.forced_etas.end(), {1.0, 1.0});
        s.note = "A2 = B2 = sigma_y (up to a joint sign)";
    }
    return s;
}

}  // namespace dimcert::certify
