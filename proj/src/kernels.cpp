#include "dimcert/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dimcert::kern {

bool avx2_available() {
#if defined(DIMCERT_HAVE_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

#ifdef DIMCERT_HAVE_AVX2
const Kernels& avx2_table() {
    static const Kernels k{detail::matmul4_avx2,        detail::gram4_avx2,
                           detail::kron22_avx2,         detail::herm_trace_dot4_avx2,
                           detail::sumsq_diff_avx2,     detail::max_abs_diff_avx2,
                           "avx2"};
    return k;
}
#endif

const Kernels* pick_default() {
    if (const char* env = std::getenv("DIMCERT_KERNEL")) {
        const std::string want(env);
        if (want == "scalar") return &scalar();
#ifdef DIMCERT_HAVE_AVX2
        if (want == "avx2" && avx2_available()) return &avx2_table();
#endif
        // Unknown or unavailable request: fall through to the probe.
    }
#ifdef DIMCERT_HAVE_AVX2
    if (avx2_available()) return &avx2_table();
#endif
    return &scalar();
}

const Kernels*& active_ptr() {
    static const Kernels* p = pick_default();
    return p;
}

}  // namespace

const Kernels& active() { return *active_ptr(); }

void select(std::string_view name) {
    if (name == "scalar") {
        active_ptr() = &scalar();
        return;
    }
#ifdef DIMCERT_HAVE_AVX2
    if (name == "avx2") {
        if (!avx2_available())
            throw std::runtime_error("avx2 kernels not supported on this cpu");
        active_ptr() = &avx2_table();
        return;
    }
#endif
    throw std::runtime_error("unknown kernel table: " + std::string(name));
}

}  // namespace dimcert::kern
