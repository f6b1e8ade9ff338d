#include "geoflow/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace geoflow::kernels {
namespace {

struct Selection {
    const Ops* ops;
    Backend backend;
};

Selection pick_default() {
    // GEOFLOW_KERNELS=scalar|avx2|neon overrides auto-detection.
    if (const char* env = std::getenv("GEOFLOW_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return {&scalar_ops(), Backend::scalar};
        if (std::strcmp(env, "avx2") == 0 && avx2_ops()) return {avx2_ops(), Backend::avx2};
        if (std::strcmp(env, "neon") == 0 && neon_ops()) return {neon_ops(), Backend::neon};
    }
    if (const Ops* ops = avx2_ops()) return {ops, Backend::avx2};
    if (const Ops* ops = neon_ops()) return {ops, Backend::neon};
    return {&scalar_ops(), Backend::scalar};
}

Selection& selection() {
    static Selection sel = pick_default();
    return sel;
}

}  // namespace

const Ops& active() { return *selection().ops; }

Backend active_backend() { return selection().backend; }

const char* backend_name() {
    switch (active_backend()) {
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
        default: return "scalar";
    }
}

void force_backend(Backend b) {
    const Ops* ops = nullptr;
    switch (b) {
        case Backend::scalar: ops = &scalar_ops(); break;
        case Backend::avx2: ops = avx2_ops(); break;
        case Backend::neon: ops = neon_ops(); break;
    }
    if (!ops) throw std::invalid_argument("kernel backend not available on this platform");
    selection() = {ops, b};
}

}  // namespace geoflow::kernels
