#pragma once

#include "gpest/acquisition.hpp"
#include "gpest/bandit.hpp"
#include "gpest/benchmarks.hpp"
#include "gpest/gp.hpp"
#include "gpest/grid.hpp"
#include "gpest/io.hpp"
#include "gpest/kernel.hpp"
#include "gpest/math.hpp"
#include "gpest/max_value.hpp"
#include "gpest/rng.hpp"
