#pragma once

/// \file wavegauge.hpp
/// \brief Umbrella header for the whole library.

#include "wavegauge/asymptotic.hpp"
#include "wavegauge/config.hpp"
#include "wavegauge/data.hpp"
#include "wavegauge/diagnostics.hpp"
#include "wavegauge/driver.hpp"
#include "wavegauge/evolve.hpp"
#include "wavegauge/frame.hpp"
#include "wavegauge/gauge.hpp"
#include "wavegauge/geodesic.hpp"
#include "wavegauge/grid.hpp"
#include "wavegauge/parallel.hpp"
#include "wavegauge/radial.hpp"
#include "wavegauge/rhs.hpp"
#include "wavegauge/schwarzschild.hpp"
#include "wavegauge/suites.hpp"
#include "wavegauge/tensor.hpp"
