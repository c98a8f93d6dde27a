#pragma once

#include <cstddef>
#include <string_view>

// Low-level arithmetic kernels for the optimizer hot loop.
//
// All complex matrices are column-major interleaved doubles (re,im pairs),
// matching Eigen's default storage for Matrix2cd/Matrix4cd, so Eigen data
// pointers can be passed through reinterpret_cast<double*>.
//   2x2: 8 doubles, entry (r,c) at [2*(2*c+r)]
//   4x4: 32 doubles, entry (r,c) at [2*(4*c+r)]
//
// Each entry point has a scalar reference implementation and may have an
// AVX2 variant; the active table is chosen once at startup (CPU probe,
// overridable with the DIMCERT_KERNEL env var) and every variant is
// equivalence-tested against the scalar reference.

namespace dimcert::kern {

struct Kernels {
    // c = a*b, 4x4 complex
    void (*matmul4)(const double* a, const double* b, double* c);
    // out = f^dagger * f, 4x4 complex
    void (*gram4)(const double* f, double* out);
    // out = a (x) b, 2x2 complex each, out 4x4
    void (*kron22)(const double* a, const double* b, double* out);
    // Re tr(a*b) for Hermitian a,b (4x4): reduces to a plain 32-wide dot
    double (*herm_trace_dot4)(const double* a, const double* b);
    // sum_i (a_i-b_i)^2 and max_i |a_i-b_i| over plain double arrays
    double (*sumsq_diff)(const double* a, const double* b, std::size_t n);
    double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
    const char* name;
};

// Active table (runtime selection, done once).
const Kernels& active();
// Scalar reference table, always available.
const Kernels& scalar();
// Force a table by name ("scalar", "avx2"); throws std::runtime_error if
// the variant is not available on this machine. Intended for tests.
void select(std::string_view name);
bool avx2_available();

// Shared helpers with a single implementation (shuffles and small
// assemblies; not worth vectorizing):

// rho = (1/4)(I + sum_i mA_i s_i(x)I + sum_j mB_j I(x)s_j + sum_ij T_ij s_i(x)s_j)
// mA,mB: 3 reals; T: 9 reals column-major 3x3, axis order (x,y,z).
void bloch_density(const double* m_a, const double* m_b, const double* t,
                   double* rho);
// out = (sy(x)sy) conj(rho) (sy(x)sy), the spin-flipped state
void spinflip4(const double* rho, double* out);

#ifdef DIMCERT_HAVE_AVX2
namespace detail {
void matmul4_avx2(const double* a, const double* b, double* c);
void gram4_avx2(const double* f, double* out);
void kron22_avx2(const double* a, const double* b, double* out);
double herm_trace_dot4_avx2(const double* a, const double* b);
double sumsq_diff_avx2(const double* a, const double* b, std::size_t n);
double max_abs_diff_avx2(const double* a, const double* b, std::size_t n);
}  // namespace detail
#endif

}  // namespace dimcert::kern
