// SPDX-License-Identifier: Apache-2.0
#pragma once

// Umbrella header for the style-based quantum GAN library.

#include "sqg/adadelta.hpp"
#include "sqg/circuit.hpp"
#include "sqg/cli.hpp"
#include "sqg/data.hpp"
#include "sqg/density.hpp"
#include "sqg/discriminator.hpp"
#include "sqg/generator.hpp"
#include "sqg/metrics.hpp"
#include "sqg/model_io.hpp"
#include "sqg/noise.hpp"
#include "sqg/rng.hpp"
#include "sqg/state.hpp"
#include "sqg/training.hpp"
