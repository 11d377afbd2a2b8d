#pragma once

#include "cdint/bridge.hpp"
#include "cdint/constraints.hpp"
#include "cdint/decay.hpp"
#include "cdint/errors.hpp"
#include "cdint/hypergraph.hpp"
#include "cdint/model.hpp"
#include "cdint/model_io.hpp"
#include "cdint/numeric.hpp"
#include "cdint/oracle.hpp"
#include "cdint/potentials.hpp"
