#pragma once

#include "ncst/config.hpp"
#include "ncst/data.hpp"
#include "ncst/distribution.hpp"
#include "ncst/error.hpp"
#include "ncst/fitting.hpp"
#include "ncst/numerics.hpp"
#include "ncst/optimize.hpp"
#include "ncst/random.hpp"
#include "ncst/skew_normal.hpp"
#include "ncst/stats.hpp"
#include "ncst/transforms.hpp"
