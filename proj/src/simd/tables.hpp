#pragma once

#include "joco/simd/kernels.hpp"

namespace joco::simd::detail {

// Only the tables compiled for this target are defined; dispatch.cpp
// references the vector ones under JOCO_HAVE_* guards.
extern const KernelTable kScalarTable;
extern const KernelTable kAvx2Table;
extern const KernelTable kNeonTable;

}  // namespace joco::simd::detail
