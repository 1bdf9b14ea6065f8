#pragma once

#include <utility>

#include "helistab/spectral_field.hpp"

namespace helistab {

// Horizontal velocity of a divergence-free field from (v3, omega3); both
// inputs must be free of horizontal-mean (k1 = k2 = 0) content.
std::pair<SpectralField, SpectralField> recover_horizontal_velocity(const SpectralField& v3,
                                                                    const SpectralField& omega3);

}  // namespace helistab
