#pragma once

#include <cstdint>

#include "stereonocs/harness/scene.hpp"

namespace stereonocs::harness {

/// Stand-in for network prediction error on NOCS maps.
struct NoiseModel {
    double sigma = 0.0;         // Gaussian coordinate noise, NOCS units
    double dropout = 0.0;       // probability of removing a pixel
    int erosion_radius = 0;     // pixels, disk structuring element
    double outlier_rate = 0.0;  // probability of replacing a coordinate by a uniform sample in [0,1]^3

    void validate() const;
    bool is_zero() const { return sigma == 0.0 && dropout == 0.0 && erosion_radius == 0 && outlier_rate == 0.0; }
};

/// Applies, in order: Gaussian noise, dropout, mask erosion, outlier
/// replacement, then clamps to [0,1]^3. Mask edits (dropout, erosion) are
/// shared by the front and back map of one camera so the two stay aligned.
/// A zero model leaves the maps bit-identical. Deterministic in `seed`.
StereoMaps corrupt(const StereoMaps& maps, const NoiseModel& noise, std::uint64_t seed);

/// Removes mask pixels whose disk of radius r is not fully inside the mask.
void erode_mask(NocsMap& front, NocsMap& back, int radius);

}  // namespace stereonocs::harness
