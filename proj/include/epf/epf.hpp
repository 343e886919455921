#pragma once

// Umbrella header.

#include "epf/timeseries.hpp"
#include "epf/load_preproc.hpp"
#include "epf/density.hpp"
#include "epf/lp.hpp"
#include "epf/dispatch.hpp"
#include "epf/postproc.hpp"
#include "epf/evaluation.hpp"
#include "epf/bundle.hpp"
#include "epf/pipeline.hpp"
#include "epf/run.hpp"
#include "epf/fixture.hpp"
