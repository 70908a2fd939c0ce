#pragma once

#include "agilesd/aacpt_tuner.hpp"
#include "agilesd/errors.hpp"
#include "agilesd/flow_simulator.hpp"
#include "agilesd/markov_model.hpp"
#include "agilesd/network_config.hpp"
