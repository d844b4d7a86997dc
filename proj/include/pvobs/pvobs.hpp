#pragma once

// Umbrella header.

#include "pvobs/analysis.hpp"
#include "pvobs/cole_hopf.hpp"
#include "pvobs/errors.hpp"
#include "pvobs/experiment.hpp"
#include "pvobs/initial_condition.hpp"
#include "pvobs/io.hpp"
#include "pvobs/observer.hpp"
#include "pvobs/pde_solver.hpp"
#include "pvobs/probes.hpp"
#include "pvobs/report.hpp"
#include "pvobs/scenario.hpp"
#include "pvobs/stability.hpp"
#include "pvobs/traffic_model.hpp"
