#pragma once

#include "survcomp/area/abc.hpp"
#include "survcomp/area/rmst.hpp"
#include "survcomp/core/dataset.hpp"
#include "survcomp/core/errors.hpp"
#include "survcomp/core/estimators.hpp"
#include "survcomp/core/parallel.hpp"
#include "survcomp/core/random.hpp"
#include "survcomp/core/risk_table.hpp"
#include "survcomp/core/step_function.hpp"
#include "survcomp/core/tails.hpp"
#include "survcomp/core/test_outcome.hpp"
#include "survcomp/datagen/censoring.hpp"
#include "survcomp/datagen/distributions.hpp"
#include "survcomp/datagen/scenarios.hpp"
#include "survcomp/harness/battery.hpp"
#include "survcomp/harness/grid.hpp"
#include "survcomp/harness/results_io.hpp"
#include "survcomp/harness/simulation.hpp"
#include "survcomp/harness/summary.hpp"
#include "survcomp/konp/konp.hpp"
#include "survcomp/omnibus/covariance.hpp"
#include "survcomp/omnibus/linalg.hpp"
#include "survcomp/omnibus/maxcombo.hpp"
#include "survcomp/omnibus/mdir.hpp"
#include "survcomp/twostage/two_stage.hpp"
#include "survcomp/wlrt/logrank.hpp"
#include "survcomp/wlrt/weights.hpp"
