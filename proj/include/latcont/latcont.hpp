#pragma once

// Umbrella header: the whole toolkit in dependency order.

#include "latcont/core.hpp"
#include "latcont/fft.hpp"
#include "latcont/trigpoly.hpp"
#include "latcont/grid.hpp"
#include "latcont/fourier.hpp"
#include "latcont/lattice.hpp"
#include "latcont/spectral.hpp"
#include "latcont/problem.hpp"
#include "latcont/green.hpp"
#include "latcont/helmholtz.hpp"
#include "latcont/scattering.hpp"
#include "latcont/checks.hpp"
#include "latcont/experiments.hpp"
#include "latcont/harness.hpp"
