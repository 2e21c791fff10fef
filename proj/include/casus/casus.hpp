#pragma once

#include "casus/calibration.hpp"
#include "casus/geometry.hpp"
#include "casus/heatmap.hpp"
#include "casus/io.hpp"
#include "casus/linalg.hpp"
#include "casus/metrics.hpp"
#include "casus/parallel.hpp"
#include "casus/propagation.hpp"
#include "casus/rng.hpp"
#include "casus/sampler.hpp"
#include "casus/shape_model.hpp"
#include "casus/synth.hpp"
#include "casus/types.hpp"
