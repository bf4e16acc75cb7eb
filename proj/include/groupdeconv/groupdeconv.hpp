#pragma once

//! Density estimation from grouped (aggregated) observations via the
//! distinguished root of the empirical characteristic function.

#include "bandwidth.hpp"
#include "charfn.hpp"
#include "cutoff.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "inversion.hpp"
#include "rng.hpp"
#include "rootlog.hpp"
#include "samples.hpp"
#include "special.hpp"
