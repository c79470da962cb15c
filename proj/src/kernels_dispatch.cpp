#include "rdd/kernels.hpp"

#include <cstdlib>

namespace rdd::kernels {

const Ops* avx2_impl();  // defined in kernels_avx2.cpp

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* avx2() {
    if (!avx2_supported()) return nullptr;
    return avx2_impl();
}

const Ops& active() {
    static const Ops* selected = [] {
        if (std::getenv("RDD_FORCE_SCALAR")) return &scalar();
        if (const Ops* v = avx2()) return v;
        return &scalar();
    }();
    return *selected;
}

}  // namespace rdd::kernels
