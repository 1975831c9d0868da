#pragma once

#include "randinfo/errors.hpp"
#include "randinfo/rng.hpp"
#include "randinfo/linalg.hpp"
#include "randinfo/spectral_model.hpp"
#include "randinfo/info_channels.hpp"
#include "randinfo/wls_engine.hpp"
#include "randinfo/sobolev_geometry.hpp"
#include "randinfo/experiments.hpp"
#include "randinfo/io.hpp"
#include "randinfo/acceptance.hpp"
