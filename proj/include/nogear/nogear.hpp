#pragma once

// Umbrella header for the library (serialization lives in nogear/io.hpp).

#include "nogear/diagnostics.hpp"
#include "nogear/estimation.hpp"
#include "nogear/eval_harness.hpp"
#include "nogear/inar_zoo.hpp"
#include "nogear/markov_engine.hpp"
#include "nogear/model_core.hpp"
#include "nogear/nelder_mead.hpp"
#include "nogear/params.hpp"
#include "nogear/types.hpp"
