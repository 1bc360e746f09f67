#pragma once

#include "sparc/prox.hpp"
#include "sparc/solver.hpp"
#include "sparc/data.hpp"
#include "sparc/metrics.hpp"
#include "sparc/experiment.hpp"
