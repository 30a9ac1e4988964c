#pragma once

#include <cmath>
#include <string>

#include "opcascade/error.hpp"

namespace opcascade {

// Per-platform engagement weights and bias.
//   w1: persona/content alignment    w2: affect/emotion resonance
//   w3: episodic-context coherence   w4: sender influence
struct PlatformParams {
    std::string platform_id;
    double w1 = 1.0;
    double w2 = 1.0;
    double w3 = 1.0;
    double w4 = 1.0;
    double bias = 0.0;

    void validate() const {
        const double w[] = {w1, w2, w3, w4};
        for (int k = 0; k < 4; ++k) {
            if (!(w[k] >= 0.0) || !std::isfinite(w[k])) {
                throw ConfigError("platform '" + platform_id + "': w" + std::to_string(k + 1) +
                                  " must be finite and >= 0");
            }
        }
        if (!std::isfinite(bias)) throw ConfigError("platform '" + platform_id + "': bias must be finite");
    }

    bool operator==(const PlatformParams&) const = default;
};

}  // namespace opcascade
