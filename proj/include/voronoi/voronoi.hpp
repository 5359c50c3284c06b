#pragma once

// Umbrella header.

#include "voronoi/classical_extras.hpp"
#include "voronoi/convolution.hpp"
#include "voronoi/csv.hpp"
#include "voronoi/error.hpp"
#include "voronoi/expression.hpp"
#include "voronoi/limit.hpp"
#include "voronoi/lln.hpp"
#include "voronoi/methods.hpp"
#include "voronoi/moving_average.hpp"
#include "voronoi/parallel.hpp"
#include "voronoi/phi.hpp"
#include "voronoi/power_series.hpp"
#include "voronoi/report.hpp"
#include "voronoi/rng.hpp"
#include "voronoi/selftest.hpp"
#include "voronoi/sequence.hpp"
#include "voronoi/voronoi_mean.hpp"
