#pragma once

#include "condtau/bandwidth.hpp"
#include "condtau/bounds.hpp"
#include "condtau/csv.hpp"
#include "condtau/error.hpp"
#include "condtau/estimators.hpp"
#include "condtau/exact_sum.hpp"
#include "condtau/inference.hpp"
#include "condtau/kernels.hpp"
#include "condtau/parallel.hpp"
#include "condtau/sample.hpp"
#include "condtau/simulation.hpp"
#include "condtau/weights.hpp"

namespace condtau {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace condtau
