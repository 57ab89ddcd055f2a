#pragma once

#include "caauc/dataset.hpp"
#include "caauc/error.hpp"
#include "caauc/io.hpp"
#include "caauc/lococv.hpp"
#include "caauc/logistic.hpp"
#include "caauc/normal.hpp"
#include "caauc/parallel.hpp"
#include "caauc/pipeline.hpp"
#include "caauc/resample.hpp"
#include "caauc/roc_metrics.hpp"
#include "caauc/simgen.hpp"
#include "caauc/smooth_objective.hpp"
#include "caauc/sphere_optimizer.hpp"
