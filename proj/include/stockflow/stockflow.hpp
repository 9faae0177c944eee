// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "stockflow/acset.hpp"
#include "stockflow/causal_loop.hpp"
#include "stockflow/composition.hpp"
#include "stockflow/diagram.hpp"
#include "stockflow/error.hpp"
#include "stockflow/expression.hpp"
#include "stockflow/io.hpp"
#include "stockflow/ode.hpp"
#include "stockflow/stratification.hpp"
