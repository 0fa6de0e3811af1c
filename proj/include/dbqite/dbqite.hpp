#pragma once

#include "dbqite/circuit.hpp"
#include "dbqite/compiler.hpp"
#include "dbqite/core.hpp"
#include "dbqite/dense.hpp"
#include "dbqite/engine.hpp"
#include "dbqite/experiment.hpp"
#include "dbqite/ite.hpp"
#include "dbqite/metrics.hpp"
#include "dbqite/models.hpp"
#include "dbqite/pauli.hpp"
#include "dbqite/simulator.hpp"
#include "dbqite/state.hpp"
