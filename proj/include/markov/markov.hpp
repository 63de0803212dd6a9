#pragma once

// Umbrella header for the numerical core.

#include "markov/bandit.hpp"
#include "markov/dense.hpp"
#include "markov/errors.hpp"
#include "markov/family.hpp"
#include "markov/markov_core.hpp"
#include "markov/recursive.hpp"
#include "markov/rng.hpp"
#include "markov/shift.hpp"
#include "markov/simplex.hpp"
#include "markov/tensor_ops.hpp"
