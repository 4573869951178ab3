#pragma once

// Bistatic Wi-Fi radar pipeline: synthetic CFR scenes, frequency-domain
// preprocessing, windowed CIR construction, LoS-path delay/phase referencing,
// clutter removal and delay-Doppler analysis.

#include "losref/baseline.hpp"
#include "losref/calibration.hpp"
#include "losref/cir.hpp"
#include "losref/clutter.hpp"
#include "losref/common.hpp"
#include "losref/config.hpp"
#include "losref/doppler.hpp"
#include "losref/fft.hpp"
#include "losref/io.hpp"
#include "losref/pipeline.hpp"
#include "losref/preprocess.hpp"
#include "losref/radio.hpp"
#include "losref/scene.hpp"
#include "losref/version.hpp"
