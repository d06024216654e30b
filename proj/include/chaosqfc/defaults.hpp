#pragma once

#include "chaosqfc/config.hpp"

namespace chaosqfc {

// The source, waveguide and receiver of the experiment: 7.5 nm FWHM at
// 1560 nm, 5 cm waveguide with group-index difference 0.09, 0.12 nm grating,
// 2.1 MHz serrodyne shift, 10 Hz rbw. config/defaults.ini mirrors this.
RunConfig default_config();

}  // namespace chaosqfc
