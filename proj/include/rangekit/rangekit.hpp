#pragma once

// Umbrella header for the full library.

#include "rangekit/config.hpp"
#include "rangekit/echo.hpp"
#include "rangekit/estimation.hpp"
#include "rangekit/fft.hpp"
#include "rangekit/fisher.hpp"
#include "rangekit/harness.hpp"
#include "rangekit/io.hpp"
#include "rangekit/linalg.hpp"
#include "rangekit/pulse_design.hpp"
#include "rangekit/special_functions.hpp"
#include "rangekit/waveform.hpp"
