#pragma once

#include "ergo/error.hpp"
#include "ergo/matrix.hpp"
#include "ergo/random.hpp"
#include "ergo/weights.hpp"
#include "ergo/superop.hpp"
#include "ergo/fixed_points.hpp"
#include "ergo/ergodic.hpp"
