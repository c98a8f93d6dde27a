#include "dimcert/kernels.hpp"

#include <cmath>
#include <complex>

// Scalar reference implementations. These define the semantics the SIMD
// variants are tested against.

namespace dimcert::kern {

namespace {

using cd = std::complex<double>;

inline const cd* as_c(const double* p) { return reinterpret_cast<const cd*>(p); }
inline cd* as_c(double* p) { return reinterpret_cast<cd*>(p); }

void matmul4_scalar(const double* a_, const double* b_, double* c_) {
    const cd* a = as_c(a_);
    const cd* b = as_c(b_);
    cd* c = as_c(c_);
    for (int j = 0; j < 4; ++j) {
        for (int r = 0; r < 4; ++r) {
            cd acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += a[4 * k + r] * b[4 * j + k];
            c[4 * j + r] = acc;
        }
    }
}

void gram4_scalar(const double* f_, double* out_) {
    const cd* f = as_c(f_);
    cd* out = as_c(out_);
    for (int c = 0; c < 4; ++c) {
        for (int r = 0; r <= c; ++r) {
            cd acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += std::conj(f[4 * r + k]) * f[4 * c + k];
            out[4 * c + r] = acc;
            if (r != c) out[4 * r + c] = std::conj(acc);
        }
    }
}

void kron22_scalar(const double* a_, const double* b_, double* out_) {
    const cd* a = as_c(a_);
    const cd* b = as_c(b_);
    cd* out = as_c(out_);
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
            for (int i = 0; i < 2; ++i)
                for (int k = 0; k < 2; ++k)
                    out[4 * (2 * j + l) + (2 * i + k)] = a[2 * j + i] * b[2 * l + k];
}

double herm_trace_dot4_scalar(const double* a, const double* b) {
    // Re tr(A B) with A,B Hermitian = sum over entries of ReA*ReB + ImA*ImB.
    double acc = 0.0;
    for (int i = 0; i < 32; ++i) acc += a[i] * b[i];
    return acc;
}

double sumsq_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

const Kernels& scalar() {
    static const Kernels k{matmul4_scalar, gram4_scalar,   kron22_scalar,
                           herm_trace_dot4_scalar, sumsq_diff_scalar,
                           max_abs_diff_scalar,    "scalar"};
    return k;
}

void bloch_density(const double* m_a, const double* m_b, const double* t,
                   double* rho) {
    // Axis order (x,y,z); T column-major: t[3*j+i] = T_ij.
    const double ax = m_a[0], ay = m_a[1], az = m_a[2];
    const double bx = m_b[0], by = m_b[1], bz = m_b[2];
    const double txx = t[0], tyx = t[1], tzx = t[2];
    const double txy = t[3], tyy = t[4], tzy = t[5];
    const double txz = t[6], tyz = t[7], tzz = t[8];

    cd* r = as_c(rho);
    auto set = [&](int i, int j, cd v) { r[4 * j + i] = v; };

    // Basis |q_A q_B> with row index 2*q_A + q_B; sigma_z|0> = +|0>.
    const cd I(0.0, 1.0);
    set(0, 0, 0.25 * (1 + az + bz + tzz));
    set(1, 1, 0.25 * (1 + az - bz - tzz));
    set(2, 2, 0.25 * (1 - az + bz - tzz));
    set(3, 3, 0.25 * (1 - az - bz + tzz));

    const cd mb_m = 0.25 * cd(bx, -by);      // <0|sigma|1> terms on B
    const cd tzm = 0.25 * cd(tzx, -tzy);     // sigma_z (x) sigma_-plane
    set(0, 1, mb_m + tzm);
    set(2, 3, mb_m - tzm);
    set(1, 0, std::conj(mb_m + tzm));
    set(3, 2, std::conj(mb_m - tzm));

    const cd ma_m = 0.25 * cd(ax, -ay);
    const cd tmz = 0.25 * cd(txz, -tyz);
    set(0, 2, ma_m + tmz);
    set(1, 3, ma_m - tmz);
    set(2, 0, std::conj(ma_m + tmz));
    set(3, 1, std::conj(ma_m - tmz));

    // sigma_- (x) sigma_- and sigma_- (x) sigma_+ blocks
    const cd tmm = 0.25 * cd(txx - tyy, -(txy + tyx));  // <00|..|11>
    const cd tmp = 0.25 * cd(txx + tyy, txy - tyx);     // <01|..|10>
    set(0, 3, tmm);
    set(3, 0, std::conj(tmm));
    set(1, 2, tmp);
    set(2, 1, std::conj(tmp));
}

void spinflip4(const double* rho, double* out) {
    // (sy(x)sy) conj(rho) (sy(x)sy): out(r,c) = y_r*y_c*conj(rho(3-r,3-c)),
    // y = (-1,+1,+1,-1).
    static const double y[4] = {-1.0, 1.0, 1.0, -1.0};
    const cd* in = as_c(rho);
    cd* o = as_c(out);
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r)
            o[4 * c + r] = y[r] * y[c] * std::conj(in[4 * (3 - c) + (3 - r)]);
}

}  // namespace dimcert::kern
