#pragma once

#include "dimcert/qmat.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

// Multi-start derivative-free minimization shared by the certification and
// key-rate layers. Determinism contract: the result depends only on
// (seed, n_starts) and the objective, never on thread scheduling — starts
// are independent and the reduction is a min over a fixed indexed set.

namespace dimcert::optim {

struct Box {
    std::vector<double> lo, hi;
    std::size_t dim() const { return lo.size(); }
};

struct OptimOptions {
    int n_starts = 100;
    std::uint64_t seed = 20150511;  // overridable everywhere seeds appear
    long max_evals = 60000;         // per start
    Box bounds;
    double residual_tol = 1e-6;
    double stat_penalty = 1e4;
    double psd_penalty = 1e4;
    double step_tol = 1e-10;
    int threads = 0;  // 0 = hardware concurrency
};

struct RejectedPoint : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Deterministic per-start random stream. mt19937_64 is bit-portable per the
// ISO spec; the uniform mapping (x >> 11) * 2^-53 is pinned here because
// std::uniform_real_distribution is not.
class SplitRng {
  public:
    explicit SplitRng(std::uint64_t seed) : gen_(seed) {}
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    std::mt19937_64 gen_;
};

std::vector<double> sample_in_box(SplitRng& rng, const Box& box);

using Objective = std::function<double(std::span<const double>)>;

struct LocalResult {
    std::vector<double> x;
    double f = 0.0;
    long evals = 0;
    bool converged = false;
};

// Bounded adaptive Nelder-Mead with shrinking-radius restarts; candidate
// points are clipped into the box. Pure local search, no randomness.
LocalResult nelder_mead(const Objective& f, std::vector<double> x0,
                        const Box& box, long max_evals,
                        double step_tol = 1e-10, double init_radius = 0.08);

struct StartRecord {
    int index = -1;
    double f = 0.0;
    long evals = 0;
    bool converged = false;
};

struct MinimizeResult {
    std::vector<double> x_best;
    double f_best = 0.0;
    int best_start = -1;
    long total_evals = 0;
    std::vector<StartRecord> per_start;
};

// Generic multi-start driver: run_start(index, rng) owns everything inside
// one start (sampling its own x0 from rng first). Used directly by the
// certification pipelines, and by minimize() below.
using StartFn = std::function<LocalResult(int index, SplitRng& rng)>;
MinimizeResult multistart(const OptimOptions& opts, const StartFn& run_start);

// The plain operation: uniform start points in the box, Nelder-Mead each,
// min over starts. Objective must be pure and total (finite or +inf).
MinimizeResult minimize(const Objective& f, const OptimOptions& opts);

// rho = F^dagger F / tr(F^dagger F); throws std::domain_error if F ~ 0.
qmat::Mat4 psd_state_from_factor(const qmat::Mat4& f);

// Elements S^{-1/2} (F_a^dagger F_a) S^{-1/2} with S the sum of the raw
// grams: positive by construction, completeness exact to roundoff.
// Non-throwing core returns false when cond(S) exceeds the limit.
bool try_povm_from_factors(const std::vector<qmat::Mat2>& factors,
                           qmat::Povm& out, double cond_limit = 1e8);
qmat::Povm povm_from_factors(const std::vector<qmat::Mat2>& factors);

}  // namespace dimcert::optim
