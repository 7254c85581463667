#pragma once

// Everything in one include.

#include "mftg/core/error.hpp"
#include "mftg/core/integrate.hpp"
#include "mftg/core/parallel.hpp"
#include "mftg/core/path.hpp"
#include "mftg/core/random.hpp"
#include "mftg/core/root.hpp"
#include "mftg/core/simplex.hpp"
#include "mftg/core/time_grid.hpp"

#include "mftg/lq/mean_variance.hpp"
#include "mftg/lq/security.hpp"

#include "mftg/cloud_sharing.hpp"
#include "mftg/coupled.hpp"
#include "mftg/delayed.hpp"
#include "mftg/dispatch.hpp"
#include "mftg/epidemics.hpp"
#include "mftg/routing.hpp"
#include "mftg/spatial.hpp"
