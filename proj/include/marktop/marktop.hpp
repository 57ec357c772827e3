#pragma once

#include "errors.hpp"
#include "markov.hpp"
#include "elliptic.hpp"
#include "approx.hpp"
#include "interp.hpp"
#include "fft.hpp"
#include "tlalgebra.hpp"
#include "matfun.hpp"
#include "generators.hpp"
#include "experiment.hpp"
