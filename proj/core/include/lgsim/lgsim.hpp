#pragma once

#include "lgsim/analytic_spectrum.hpp"
#include "lgsim/detector.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/fourier.hpp"
#include "lgsim/io.hpp"
#include "lgsim/lindblad.hpp"
#include "lgsim/qubit_dynamics.hpp"
#include "lgsim/records.hpp"
#include "lgsim/rng.hpp"
#include "lgsim/units.hpp"
