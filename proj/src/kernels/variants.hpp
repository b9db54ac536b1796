#pragma once

#include "jfa/kernels.hpp"

namespace jfa::kernels {

namespace scalar {
const KernelTable& table() noexcept;
}

#if defined(JFA_HAS_AVX2_KERNELS)
namespace avx2 {
const KernelTable& table() noexcept;
}
#endif

}  // namespace jfa::kernels
