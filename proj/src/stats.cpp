#include "dimcert/stats.hpp"

#include "dimcert/qmat.hpp"

#include <cmath>
#include <stdexcept>

namespace dimcert::stats {

namespace {

std::vector<int> default_labels(int k) {
    if (k == 2) return {+1, -1};
    if (k == 3) return {+1, -1, 0};
    std::vector<int> l(k);
    for (int i = 0; i < k; ++i) l[i] = i;
    return l;
}

void check_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::domain_error(std::string(name) + " must lie in [0,1]");
}

// Label sign of a dichotomic outcome index: 0 -> +1, 1 -> -1.
inline int sgn(int a) { return a == 0 ? +1 : -1; }

ProbTable chsh(double w) {
    auto t = ProbTable::zeros(2, 2, 2, 2);
    const double r2 = std::sqrt(2.0);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const int s = sgn(a) * sgn(b) * ((x * y) ? -1 : 1);
                    t.at(x, y, a, b) = (2.0 + s * r2 * w) / 8.0;
                }
    return t;
}

ProbTable bb84(double w) {
    auto t = ProbTable::zeros(2, 2, 2, 2);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    t.at(x, y, a, b) =
                        (1.0 + sgn(a) * sgn(b) * (x == y ? w : 0.0)) / 4.0;
    return t;
}

ProbTable sixstate(double w) {
    auto t = ProbTable::zeros(3, 3, 2, 2);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const double corr = (x == y) ? (x == 2 ? -w : w) : 0.0;
                    t.at(x, y, a, b) = (1.0 + sgn(a) * sgn(b) * corr) / 4.0;
                }
    return t;
}

// Three-outcome detection-loophole table built on p_BB84. Outcome order
// [+1,-1,0], 0 = no click. Single-click rows carry the party that clicked;
// the table stays normalized per setting and has P(a=0|x) = 1-eps_a.
ProbTable noisy_bb84(double w, double ea, double eb) {
    auto base = bb84(w);
    auto t = ProbTable::zeros(2, 2, 3, 3);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    t.at(x, y, a, b) = ea * eb * base.at(x, y, a, b);
            for (int a = 0; a < 2; ++a) t.at(x, y, a, 2) = ea * (1.0 - eb) * 0.5;
            for (int b = 0; b < 2; ++b) t.at(x, y, 2, b) = (1.0 - ea) * eb * 0.5;
            t.at(x, y, 2, 2) = (1.0 - ea) * (1.0 - eb);
        }
    return t;
}

// Two-outcome table obtained from the three-outcome one by relabeling every
// no-click as +1 (exact outcome merge, no re-derivation).
ProbTable noisy_bb84_binarized(double w, double ea, double eb) {
    auto t3 = noisy_bb84(w, ea, eb);
    auto t = ProbTable::zeros(2, 2, 2, 2);
    auto merge = [](int a3) { return a3 == 1 ? 1 : 0; };  // {+1,0}->+1, -1->-1
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    t.at(x, y, merge(a), merge(b)) += t3.at(x, y, a, b);
    return t;
}

ProbTable sic_table(double theta) {
    const auto elems = qmat::sic_povm();
    qmat::Povm sic;
    sic.elements = elems;
    const Eigen::Vector4cd psi = qmat::pure_theta(theta);
    const qmat::Mat4 rho = psi * psi.adjoint();
    return qmat::born_statistics(rho, {sic}, {sic});
}

// The deterministic vertex p(a=+1|x) = p(b=+1|y) = 1.
ProbTable deterministic_point() {
    auto t = ProbTable::zeros(2, 2, 2, 2);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) t.at(x, y, 0, 0) = 1.0;
    return t;
}

ProbTable chsh_slice(double u, double v) {
    if (u < 0.0 || v < 0.0 || u + v > 1.0 + 1e-12)
        throw std::domain_error("slice weights must satisfy u,v>=0, u+v<=1");
    const auto p1 = chsh(1.0);
    const auto p0 = chsh(0.0);
    const auto pd = deterministic_point();
    auto t = ProbTable::zeros(2, 2, 2, 2);
    for (std::size_t i = 0; i < t.p.size(); ++i)
        t.p[i] = u * p1.p[i] + v * p0.p[i] + (1.0 - u - v) * pd.p[i];
    return t;
}

}  // namespace

ProbTable ProbTable::zeros(int nx, int ny, int ka, int kb) {
    ProbTable t;
    t.nx = nx;
    t.ny = ny;
    t.ka = ka;
    t.kb = kb;
    t.labels_a = default_labels(ka);
    t.labels_b = default_labels(kb);
    t.p.assign(static_cast<std::size_t>(nx) * ny * ka * kb, 0.0);
    return t;
}

const char* family_name(Family f) {
    switch (f) {
        case Family::CHSH: return "chsh";
        case Family::BB84: return "bb84";
        case Family::SIXSTATE: return "sixstate";
        case Family::NOISY_BB84: return "noisy-bb84";
        case Family::NOISY_BB84_BINARIZED: return "noisy-bb84-binarized";
        case Family::SIC: return "sic";
        case Family::CHSH_SLICE: return "chsh-slice";
    }
    return "?";
}

std::optional<Family> family_from_name(const std::string& name) {
    for (Family f : {Family::CHSH, Family::BB84, Family::SIXSTATE,
                     Family::NOISY_BB84, Family::NOISY_BB84_BINARIZED,
                     Family::SIC, Family::CHSH_SLICE})
        if (name == family_name(f)) return f;
    return std::nullopt;
}

ProbTable generate(const FamilySpec& spec) {
    switch (spec.family) {
        case Family::CHSH:
            check_unit(spec.w, "w");
            return chsh(spec.w);
        case Family::BB84:
            check_unit(spec.w, "w");
            return bb84(spec.w);
        case Family::SIXSTATE:
            check_unit(spec.w, "w");
            return sixstate(spec.w);
        case Family::NOISY_BB84:
            check_unit(spec.w, "w");
            check_unit(spec.eps_a, "eps_a");
            check_unit(spec.eps_b, "eps_b");
            return noisy_bb84(spec.w, spec.eps_a, spec.eps_b);
        case Family::NOISY_BB84_BINARIZED:
            check_unit(spec.w, "w");
            check_unit(spec.eps_a, "eps_a");
            check_unit(spec.eps_b, "eps_b");
            return noisy_bb84_binarized(spec.w, spec.eps_a, spec.eps_b);
        case Family::SIC:
            if (!(spec.theta >= 0.0 && spec.theta <= M_PI / 4.0 + 1e-12))
                throw std::domain_error("theta must lie in [0, pi/4]");
            return sic_table(spec.theta);
        case Family::CHSH_SLICE:
            return chsh_slice(spec.u, spec.v);
    }
    throw std::domain_error("unknown family");
}

double qber(const ProbTable& p) {
    double q = 0.0;
    const int k = std::min(p.ka, p.kb);
    for (int a = 0; a < p.ka; ++a)
        for (int b = 0; b < p.kb; ++b)
            if (a != b || a >= k) q += p.at(0, 0, a, b);
    return q;
}

ValidationReport validate(const ProbTable& t) {
    ValidationReport r;
    r.nonneg = true;
    r.normalized = true;
    for (int x = 0; x < t.nx; ++x)
        for (int y = 0; y < t.ny; ++y) {
            double s = 0.0;
            for (int a = 0; a < t.ka; ++a)
                for (int b = 0; b < t.kb; ++b) {
                    const double v = t.at(x, y, a, b);
                    if (v < 0.0) r.nonneg = false;
                    s += v;
                }
            if (std::abs(s - 1.0) > 1e-12) r.normalized = false;
        }

    // Marginals per (setting, outcome, other-party setting).
    double gap = 0.0;
    r.marginals_a.assign(t.nx, std::vector<double>(t.ka, 0.0));
    r.marginals_b.assign(t.ny, std::vector<double>(t.kb, 0.0));
    for (int x = 0; x < t.nx; ++x)
        for (int a = 0; a < t.ka; ++a) {
            double lo = 2.0, hi = -1.0;
            for (int y = 0; y < t.ny; ++y) {
                double m = 0.0;
                for (int b = 0; b < t.kb; ++b) m += t.at(x, y, a, b);
                lo = std::min(lo, m);
                hi = std::max(hi, m);
                r.marginals_a[x][a] += m / t.ny;
            }
            gap = std::max(gap, hi - lo);
        }
    for (int y = 0; y < t.ny; ++y)
        for (int b = 0; b < t.kb; ++b) {
            double lo = 2.0, hi = -1.0;
            for (int x = 0; x < t.nx; ++x) {
                double m = 0.0;
                for (int a = 0; a < t.ka; ++a) m += t.at(x, y, a, b);
                lo = std::min(lo, m);
                hi = std::max(hi, m);
                r.marginals_b[y][b] += m / t.nx;
            }
            gap = std::max(gap, hi - lo);
        }
    r.no_signaling_gap = gap;
    return r;
}

double correlator(const ProbTable& t, int x, int y) {
    if (t.ka != 2 || t.kb != 2)
        throw std::domain_error("correlator requires a dichotomic table");
    double c = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            c += t.labels_a[a] * t.labels_b[b] * t.at(x, y, a, b);
    return c;
}

std::optional<FamilySpec> recognize(const ProbTable& t, double tol) {
    if (t.ka != 2 || t.kb != 2) return std::nullopt;
    auto matches = [&](const ProbTable& ref) {
        if (ref.p.size() != t.p.size()) return false;
        for (std::size_t i = 0; i < t.p.size(); ++i)
            if (std::abs(ref.p[i] - t.p[i]) > tol) return false;
        return true;
    };
    if (t.nx == 2 && t.ny == 2) {
        for (Family f : {Family::BB84, Family::CHSH}) {
            FamilySpec spec;
            spec.family = f;
            const double scale = (f == Family::CHSH) ? std::sqrt(2.0) : 1.0;
            spec.w = std::clamp(scale * correlator(t, 0, 0), 0.0, 1.0);
            if (matches(generate(spec))) return spec;
        }
    } else if (t.nx == 3 && t.ny == 3) {
        FamilySpec spec;
        spec.family = Family::SIXSTATE;
        spec.w = std::clamp(correlator(t, 0, 0), 0.0, 1.0);
        if (matches(generate(spec))) return spec;
    }
    return std::nullopt;
}

}  // namespace dimcert::stats
