#pragma once

#include "riskward/audit.hpp"
#include "riskward/builtin.hpp"
#include "riskward/distribution.hpp"
#include "riskward/errors.hpp"
#include "riskward/io.hpp"
#include "riskward/multistage.hpp"
#include "riskward/nested.hpp"
#include "riskward/risk.hpp"
#include "riskward/scenario_tree.hpp"
