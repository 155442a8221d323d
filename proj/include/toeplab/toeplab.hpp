#pragma once

// Core library: matrices, norms, symbol bounds, ensembles, tail bounds.
#include "toeplab/concentration.hpp"
#include "toeplab/dense.hpp"
#include "toeplab/ensemble.hpp"
#include "toeplab/fft.hpp"
#include "toeplab/norm.hpp"
#include "toeplab/seed.hpp"
#include "toeplab/symbol.hpp"
#include "toeplab/toeplitz.hpp"
#include "toeplab/version.hpp"
