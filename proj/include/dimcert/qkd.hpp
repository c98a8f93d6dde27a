#pragma once

#include "dimcert/certify.hpp"
#include "dimcert/optim.hpp"
#include "dimcert/qmat.hpp"

#include <cstdint>
#include <string>

// Certified secret-key fractions under the qubit assumption, asymptotic
// Devetak-Winter setting: Eve holds a purification of rho_AB, her
// information is the Holevo quantity of Alice's key measurement, and the
// certified fraction minimizes 1 - h(Q) - chi over all models compatible
// with the observed statistics.

namespace dimcert::qkd {

// chi(A:E) = S(rho_E) - sum_a p(a) S(rho_E^a) for the purification of
// rho_ab, with rho_E^a conditioned on Alice's key outcome. Evaluated with
// the POVM element directly: the trace form makes sqrt(Pi) and Pi give the
// same conditional state. Outcomes with p(a) ~ 0 contribute nothing.
double holevo(const qmat::Mat4& rho_ab, const qmat::Povm& key_povm);

struct ReferenceRates {
    double r_bb84 = 0.0;      // 1 - 2 h(Q)
    double r_sixstate = 0.0;  // 1 - H({1-3Q/2, Q/2, Q/2, Q/2})
};
ReferenceRates reference_rates(double q);

struct KeyRateResult {
    double r = 0.0;      // certified fraction, clipped at 0
    double r_raw = 0.0;  // 1 - h(Q) - holevo, unclipped
    double q = 0.0;
    double holevo = 0.0;  // largest compatible Eve information found
    certify::Model model;
    double residual = 0.0;
    double psd_min = 0.0;
    certify::Status status = certify::Status::INFEASIBLE_WITHIN_TOL;
    int n_starts = 0;
    std::uint64_t seed = 0;
    int best_start = -1;
    long total_evals = 0;
    std::string note;
};

// Key from settings A0/B0; Q = (1-W)/2 is fixed by the statistics. The
// search space is the constrained parametrization of the certify layer.
KeyRateResult certified_keyrate(certify::ConstrainedFamily family, double w,
                                optim::OptimOptions opts);

// Detector-inefficiency analysis on the binarized (no-click -> +1) BB84
// statistics with eps_A = eps_B = eps. Eve's model caveat is surfaced in
// the result note: she gets no record of which rounds failed to click.
KeyRateResult noisy_bb84_keyrate(double w, double eps,
                                 optim::OptimOptions opts);

// The explicit optimal six-state attack: measuring
// rho = (1/4)(1 + W(XX - YY) + ZZ) with A = (z,x,y), B0 = (1 +- W z)/2,
// B1/B2 = x/y. Reproduces p_sixstate(W) exactly and gives r = 1-2h(Q);
// a deterministic, optimization-free anchor.
certify::Model sixstate_attack_model(double w);

}  // namespace dimcert::qkd
