// Umbrella header.
#pragma once

#include "ammfee/amm_curve.hpp"
#include "ammfee/auction.hpp"
#include "ammfee/errors.hpp"
#include "ammfee/fixed_decimal.hpp"
#include "ammfee/implied.hpp"
#include "ammfee/io.hpp"
#include "ammfee/lvr.hpp"
#include "ammfee/market_sim.hpp"
#include "ammfee/parallel.hpp"
#include "ammfee/random.hpp"
