#pragma once

// Umbrella header.

#include "curvcone/cones.hpp"
#include "curvcone/curvature_ops.hpp"
#include "curvcone/experiments.hpp"
#include "curvcone/flow.hpp"
#include "curvcone/models.hpp"
#include "curvcone/reporting.hpp"
#include "curvcone/rng.hpp"
#include "curvcone/run_config.hpp"
#include "curvcone/runner.hpp"
#include "curvcone/wedge_basis.hpp"
