#include "dimcert/optim.hpp"

#include "dimcert/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace dimcert::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline void clip(std::vector<double>& x, const Box& box) {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::min(box.hi[i], std::max(box.lo[i], x[i]));
}

}  // namespace

std::vector<double> sample_in_box(SplitRng& rng, const Box& box) {
    std::vector<double> x(box.dim());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = rng.uniform(box.lo[i], box.hi[i]);
    return x;
}

LocalResult nelder_mead(const Objective& f, std::vector<double> x0,
                        const Box& box, long max_evals, double step_tol,
                        double init_radius) {
    const std::size_t n = box.dim();
    clip(x0, box);
    LocalResult out;
    out.x = x0;
    out.f = f(out.x);
    out.evals = 1;
    if (n == 0 || max_evals <= 1) return out;

    // Gao-Han adaptive coefficients.
    const double nd = static_cast<double>(n);
    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / nd;
    const double gamma = 0.75 - 0.5 / nd;
    const double delta = 1.0 - 1.0 / nd;

    std::vector<std::vector<double>> pts(n + 1);
    std::vector<double> fv(n + 1);
    std::vector<double> centroid(n), cand(n), cand2(n);

    double radius = init_radius;
    const double radius_floor = 1e-9;

    while (out.evals < max_evals) {
        // (Re)build a simplex around the incumbent.
        pts[0] = out.x;
        fv[0] = out.f;
        for (std::size_t i = 0; i < n; ++i) {
            pts[i + 1] = out.x;
            const double span = box.hi[i] - box.lo[i];
            double step = radius * span;
            if (step <= 0.0) step = radius;
            if (pts[i + 1][i] + step > box.hi[i]) step = -step;
            pts[i + 1][i] += step;
            clip(pts[i + 1], box);
            fv[i + 1] = f(pts[i + 1]);
            ++out.evals;
            if (out.evals >= max_evals) break;
        }

        bool collapsed = false;
        while (out.evals < max_evals) {
            // Best, worst, second-worst by scan.
            std::size_t ib = 0, iw = 0;
            for (std::size_t i = 1; i <= n; ++i) {
                if (fv[i] < fv[ib]) ib = i;
                if (fv[i] > fv[iw]) iw = i;
            }
            std::size_t is = (iw == 0) ? 1 : 0;
            for (std::size_t i = 0; i <= n; ++i)
                if (i != iw && fv[i] > fv[is]) is = i;

            // Diameter check against the best vertex.
            double diam = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == ib) continue;
                double d = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    d = std::max(d, std::abs(pts[i][j] - pts[ib][j]));
                diam = std::max(diam, d);
            }
            if (diam < step_tol) {
                collapsed = true;
                break;
            }

            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i <= n; ++i)
                    if (i != iw) s += pts[i][j];
                centroid[j] = s / nd;
            }

            auto along = [&](double coef, std::vector<double>& dst) {
                for (std::size_t j = 0; j < n; ++j)
                    dst[j] = centroid[j] + coef * (centroid[j] - pts[iw][j]);
                clip(dst, box);
            };

            along(alpha, cand);
            const double fr = f(cand);
            ++out.evals;

            if (fr < fv[ib]) {
                along(alpha * beta, cand2);
                const double fe = f(cand2);
                ++out.evals;
                if (fe < fr) {
                    pts[iw] = cand2;
                    fv[iw] = fe;
                } else {
                    pts[iw] = cand;
                    fv[iw] = fr;
                }
            } else if (fr < fv[is]) {
                pts[iw] = cand;
                fv[iw] = fr;
            } else {
                const bool outside = fr < fv[iw];
                along(outside ? alpha * gamma : -gamma, cand2);
                const double fc = f(cand2);
                ++out.evals;
                if (fc < (outside ? fr : fv[iw])) {
                    pts[iw] = cand2;
                    fv[iw] = fc;
                } else {
                    // Shrink toward the best vertex.
                    for (std::size_t i = 0; i <= n; ++i) {
                        if (i == ib) continue;
                        for (std::size_t j = 0; j < n; ++j)
                            pts[i][j] = pts[ib][j] + delta * (pts[i][j] - pts[ib][j]);
                        clip(pts[i], box);
                        fv[i] = f(pts[i]);
                        ++out.evals;
                        if (out.evals >= max_evals) break;
                    }
                }
            }
        }

        // Harvest the incumbent.
        std::size_t ib = 0;
        for (std::size_t i = 1; i <= n; ++i)
            if (fv[i] < fv[ib]) ib = i;
        if (fv[ib] < out.f) {
            out.f = fv[ib];
            out.x = pts[ib];
        }
        if (collapsed) {
            out.converged = true;
            radius *= 0.25;
            if (radius < radius_floor) break;
        }
    }
    return out;
}

MinimizeResult multistart(const OptimOptions& opts, const StartFn& run_start) {
    const int n = std::max(1, opts.n_starts);
    std::vector<LocalResult> results(n);
    std::atomic<int> next{0};

    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            SplitRng rng(opts.seed ^ static_cast<std::uint64_t>(i));
            results[i] = run_start(i, rng);
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const int nthreads = std::min<long>(
        n, opts.threads > 0 ? opts.threads : static_cast<int>(hw));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    MinimizeResult out;
    out.f_best = kInf;
    out.per_start.reserve(n);
    for (int i = 0; i < n; ++i) {
        const auto& r = results[i];
        out.per_start.push_back({i, r.f, r.evals, r.converged});
        out.total_evals += r.evals;
        if (r.f < out.f_best) {  // strict: ties keep the lowest index
            out.f_best = r.f;
            out.x_best = r.x;
            out.best_start = i;
        }
    }
    return out;
}

MinimizeResult minimize(const Objective& f, const OptimOptions& opts) {
    return multistart(opts, [&](int, SplitRng& rng) {
        auto x0 = sample_in_box(rng, opts.bounds);
        return nelder_mead(f, std::move(x0), opts.bounds, opts.max_evals,
                           opts.step_tol);
    });
}

qmat::Mat4 psd_state_from_factor(const qmat::Mat4& f) {
    qmat::Mat4 g;
    kern::active().gram4(reinterpret_cast<const double*>(f.data()),
                         reinterpret_cast<double*>(g.data()));
    const double tr = g.trace().real();
    if (!(tr > 1e-14)) throw std::domain_error("psd_state_from_factor: F ~ 0");
    return g / tr;
}

bool try_povm_from_factors(const std::vector<qmat::Mat2>& factors,
                           qmat::Povm& out, double cond_limit) {
    const int k = static_cast<int>(factors.size());
    if (k == 0) return false;
    std::vector<qmat::Mat2> raw(k);
    qmat::Mat2 s = qmat::Mat2::Zero();
    for (int a = 0; a < k; ++a) {
        raw[a] = factors[a].adjoint() * factors[a];
        s += raw[a];
    }
    Eigen::SelfAdjointEigenSolver<qmat::Mat2> es;
    es.computeDirect(s);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
    if (!(lo > 0.0) || hi / lo > cond_limit) return false;
    const qmat::Mat2 inv_sqrt = es.eigenvectors() *
                                Eigen::Vector2d(1.0 / std::sqrt(lo), 1.0 / std::sqrt(hi))
                                    .asDiagonal() *
                                es.eigenvectors().adjoint();
    out.elements.resize(k);
    for (int a = 0; a < k; ++a) out.elements[a] = inv_sqrt * raw[a] * inv_sqrt;
    return true;
}

qmat::Povm povm_from_factors(const std::vector<qmat::Mat2>& factors) {
    qmat::Povm p;
    if (!try_povm_from_factors(factors, p))
        throw RejectedPoint("povm_from_factors: ill-conditioned element sum");
    return p;
}

}  // namespace dimcert::optim
