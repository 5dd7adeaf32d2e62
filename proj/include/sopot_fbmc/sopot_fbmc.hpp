// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sopot_fbmc/channel.hpp"
#include "sopot_fbmc/csd.hpp"
#include "sopot_fbmc/errors.hpp"
#include "sopot_fbmc/experiments.hpp"
#include "sopot_fbmc/fbmc.hpp"
#include "sopot_fbmc/greedy.hpp"
#include "sopot_fbmc/io.hpp"
#include "sopot_fbmc/psd.hpp"
#include "sopot_fbmc/qam.hpp"
#include "sopot_fbmc/sopot.hpp"
