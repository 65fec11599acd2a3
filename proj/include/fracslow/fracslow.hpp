#pragma once

// Everything except the config runner (fracslow/cli/*, which needs yaml-cpp).
#include "fracslow/core/error.hpp"
#include "fracslow/core/fft.hpp"
#include "fracslow/core/format.hpp"
#include "fracslow/core/parallel.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/sample_path.hpp"
#include "fracslow/core/stats.hpp"
#include "fracslow/noise/decomposition.hpp"
#include "fracslow/noise/fbm.hpp"
#include "fracslow/noise/hurst.hpp"
#include "fracslow/noise/path_io.hpp"
#include "fracslow/noise/riemann_liouville.hpp"
#include "fracslow/noise/seminorms.hpp"
#include "fracslow/noise/validate.hpp"
#include "fracslow/drift/certify.hpp"
#include "fracslow/drift/drift.hpp"
#include "fracslow/integrate/integrators.hpp"
#include "fracslow/integrate/types.hpp"
#include "fracslow/measures/averaged_table.hpp"
#include "fracslow/measures/distances.hpp"
#include "fracslow/measures/empirical.hpp"
#include "fracslow/ergodicity/control.hpp"
#include "fracslow/ergodicity/coupling.hpp"
#include "fracslow/ergodicity/decay.hpp"
#include "fracslow/ergodicity/experiments.hpp"
#include "fracslow/averaging/coefficients.hpp"
#include "fracslow/averaging/experiment.hpp"
