#pragma once

// Multi-level influence/reaction simulation kernel with two bundled Game of
// Life models and an experiment harness.

#include "irsim/errors.hpp"
#include "irsim/lab/config.hpp"
#include "irsim/lab/csv.hpp"
#include "irsim/lab/experiment.hpp"
#include "irsim/lab/metrics.hpp"
#include "irsim/level_graph.hpp"
#include "irsim/life/grid.hpp"
#include "irsim/life/lambda.hpp"
#include "irsim/life/model.hpp"
#include "irsim/life/oracle.hpp"
#include "irsim/life/reaction.hpp"
#include "irsim/mlife/model.hpp"
#include "irsim/mlife/partition.hpp"
#include "irsim/mlife/reaction.hpp"
#include "irsim/rng.hpp"
#include "irsim/scheduler.hpp"
#include "irsim/simulation.hpp"
#include "irsim/time.hpp"
