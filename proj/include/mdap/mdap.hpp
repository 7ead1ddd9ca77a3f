#pragma once

#include "mdap/assignment.hpp"
#include "mdap/axial.hpp"
#include "mdap/bdts.hpp"
#include "mdap/bdts_schedule.hpp"
#include "mdap/bench.hpp"
#include "mdap/bilinear.hpp"
#include "mdap/common.hpp"
#include "mdap/cost_tensor.hpp"
#include "mdap/exact.hpp"
#include "mdap/exp_random.hpp"
#include "mdap/matching.hpp"
#include "mdap/refreshable_costs.hpp"
