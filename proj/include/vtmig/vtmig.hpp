#pragma once

// Three-tier vehicle/edge/cloud simulator with twin-task migration,
// Stackelberg resource pricing, GCN feature extraction and multi-objective
// multi-agent actor-critic training.

#include "vtmig/baselines.hpp"
#include "vtmig/checkpoint.hpp"
#include "vtmig/common.hpp"
#include "vtmig/config.hpp"
#include "vtmig/costs.hpp"
#include "vtmig/env.hpp"
#include "vtmig/gcn.hpp"
#include "vtmig/graph.hpp"
#include "vtmig/harness.hpp"
#include "vtmig/learner.hpp"
#include "vtmig/metrics.hpp"
#include "vtmig/netlink.hpp"
#include "vtmig/nn.hpp"
#include "vtmig/replay.hpp"
#include "vtmig/scenario.hpp"
#include "vtmig/stackelberg.hpp"
