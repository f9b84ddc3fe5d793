#pragma once

#include "pwlab/dynamics.hpp"
#include "pwlab/error.hpp"
#include "pwlab/export.hpp"
#include "pwlab/fourier.hpp"
#include "pwlab/model.hpp"
#include "pwlab/profile.hpp"
#include "pwlab/quadrature.hpp"
#include "pwlab/spectral.hpp"
#include "pwlab/stability.hpp"
