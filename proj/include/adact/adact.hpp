#pragma once

// Umbrella header for the adact library: training of single-hidden-layer
// perceptrons whose hidden activations are trainable piecewise-linear
// functions, plus the MOLF / OWO-OLS / CG / SCG trainers, the multiply-count
// model, and the experiment harness.

#include "activation.hpp"
#include "burden.hpp"
#include "data.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "matrix.hpp"
#include "network.hpp"
#include "ols.hpp"
#include "parallel.hpp"
#include "serialize.hpp"
#include "trainers.hpp"
