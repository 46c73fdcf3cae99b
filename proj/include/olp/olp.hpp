#pragma once

// Online packing LPs in the random-permutation model: instances, an exact
// offline solver, dual-price classification, delta-net perturbation, the
// online pricing algorithms and the Monte Carlo harness.

#include "olp/bounds.hpp"
#include "olp/brute_force.hpp"
#include "olp/experiment.hpp"
#include "olp/instance.hpp"
#include "olp/instance_io.hpp"
#include "olp/online.hpp"
#include "olp/perturb.hpp"
#include "olp/pricing.hpp"
#include "olp/rng.hpp"
#include "olp/solver.hpp"
