#pragma once

// Umbrella header for the discounted-reachability toolbox.

#include "mdr/backup.hpp"
#include "mdr/config.hpp"
#include "mdr/grid.hpp"
#include "mdr/io.hpp"
#include "mdr/models.hpp"
#include "mdr/presets.hpp"
#include "mdr/reach.hpp"
#include "mdr/runner.hpp"
#include "mdr/solver.hpp"
#include "mdr/targets.hpp"
#include "mdr/tdlearn.hpp"
#include "mdr/value.hpp"
