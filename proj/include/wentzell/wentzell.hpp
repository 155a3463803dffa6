#ifndef WENTZELL_WENTZELL_HPP
#define WENTZELL_WENTZELL_HPP

#include "wentzell/core.hpp"
#include "wentzell/experiments.hpp"
#include "wentzell/hum.hpp"
#include "wentzell/io.hpp"
#include "wentzell/linalg.hpp"
#include "wentzell/moment.hpp"
#include "wentzell/pde.hpp"
#include "wentzell/quadrature.hpp"
#include "wentzell/spectral.hpp"

#endif  // WENTZELL_WENTZELL_HPP
