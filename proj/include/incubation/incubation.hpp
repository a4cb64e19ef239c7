#pragma once

#include "bootstrap.hpp"
#include "distribution.hpp"
#include "error.hpp"
#include "kernel.hpp"
#include "npmle.hpp"
#include "observation.hpp"
#include "parallel.hpp"
#include "pattern_search.hpp"
#include "random.hpp"
#include "reduction.hpp"
#include "sampling.hpp"
#include "score.hpp"
#include "simulation.hpp"
#include "smooth.hpp"
#include "variance.hpp"
#include "version.hpp"
#include "weibull.hpp"
