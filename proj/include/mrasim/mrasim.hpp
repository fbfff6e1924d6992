#pragma once

#include "mrasim/error.hpp"
#include "mrasim/row_decoder.hpp"
#include "mrasim/dram_state.hpp"
#include "mrasim/analog_model.hpp"
#include "mrasim/command_engine.hpp"
#include "mrasim/primitives.hpp"
#include "mrasim/bitserial.hpp"
#include "mrasim/destruct.hpp"
#include "mrasim/config.hpp"
#include "mrasim/experiments.hpp"
