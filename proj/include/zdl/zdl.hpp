#pragma once

#include "zdl/birkhoff_flow.hpp"
#include "zdl/burgers.hpp"
#include "zdl/error.hpp"
#include "zdl/experiment.hpp"
#include "zdl/io.hpp"
#include "zdl/lax_spectral.hpp"
#include "zdl/numerics.hpp"
#include "zdl/periodic_signal.hpp"
#include "zdl/quantization.hpp"
#include "zdl/single_well.hpp"
