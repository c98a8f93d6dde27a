#pragma once

#include <optional>
#include <string>
#include <vector>

// The observed-statistics layer: probability tables p(a,b|x,y), the closed
// form measurement families studied here, and table validation.

namespace dimcert::stats {

// Flat row-major [x][y][a][b]. Dichotomic outcome labels are {+1,-1} in that
// order; three-outcome tables append the no-click outcome as label 0.
struct ProbTable {
    int nx = 0, ny = 0, ka = 0, kb = 0;
    std::vector<int> labels_a, labels_b;
    std::vector<double> p;

    double& at(int x, int y, int a, int b) {
        return p[((x * ny + y) * ka + a) * kb + b];
    }
    double at(int x, int y, int a, int b) const {
        return p[((x * ny + y) * ka + a) * kb + b];
    }
    static ProbTable zeros(int nx, int ny, int ka, int kb);
};

enum class Family {
    CHSH,
    BB84,
    SIXSTATE,
    NOISY_BB84,
    NOISY_BB84_BINARIZED,
    SIC,
    CHSH_SLICE,
};

struct FamilySpec {
    Family family = Family::BB84;
    double w = 1.0;        // visibility, in [0,1]
    double eps_a = 1.0;    // detector efficiencies, in [0,1]
    double eps_b = 1.0;
    double theta = 0.0;    // state angle, in [0, pi/4]
    double u = 0.0;        // slice weights, u,v >= 0, u+v <= 1
    double v = 0.0;
};

const char* family_name(Family f);
std::optional<Family> family_from_name(const std::string& name);

ProbTable generate(const FamilySpec& spec);

// QBER of the key settings x=y=0: sum of p over a != b.
double qber(const ProbTable& p);

struct ValidationReport {
    bool normalized = false;
    bool nonneg = false;
    double no_signaling_gap = 0.0;
    // P(a|x) and P(b|y), averaged over the other party's settings
    std::vector<std::vector<double>> marginals_a, marginals_b;
};

ValidationReport validate(const ProbTable& p);

// <A_x B_y> correlators of a dichotomic table.
double correlator(const ProbTable& p, int x, int y);

// Recognize a closed-form family from a table (within tol entrywise);
// returns the spec that regenerates it. Only CHSH/BB84/SIXSTATE are
// recognized (what the constrained certification paths accept).
std::optional<FamilySpec> recognize(const ProbTable& p, double tol = 1e-9);

}  // namespace dimcert::stats
