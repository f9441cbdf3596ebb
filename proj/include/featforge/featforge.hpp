#pragma once

// Umbrella header for the feature-transformation search engine.

#include "featforge/collector.hpp"
#include "featforge/collector_config.hpp"
#include "featforge/config.hpp"
#include "featforge/cross_val.hpp"
#include "featforge/dataset.hpp"
#include "featforge/expr.hpp"
#include "featforge/generator.hpp"
#include "featforge/matrix.hpp"
#include "featforge/metrics.hpp"
#include "featforge/models.hpp"
#include "featforge/orchestrator.hpp"
#include "featforge/population_db.hpp"
#include "featforge/prompt.hpp"
#include "featforge/qlearn.hpp"
#include "featforge/remote_llm.hpp"
#include "featforge/rng.hpp"
#include "featforge/state_rep.hpp"
#include "featforge/verifier.hpp"
