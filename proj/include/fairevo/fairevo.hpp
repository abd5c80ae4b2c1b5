#pragma once

#include "fairevo/error.hpp"
#include "fairevo/random.hpp"
#include "fairevo/matrix.hpp"
#include "fairevo/data.hpp"
#include "fairevo/metrics.hpp"
#include "fairevo/fairness.hpp"
#include "fairevo/models.hpp"
#include "fairevo/pipeline.hpp"
#include "fairevo/search.hpp"
#include "fairevo/stats.hpp"
#include "fairevo/harness.hpp"
#include "fairevo/cli.hpp"
