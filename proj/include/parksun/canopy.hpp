#pragma once

#include <optional>
#include <span>
#include <vector>

#include "parksun/vegetation.hpp"

namespace parksun {

/// Circular region of interest. Center as fractions of width/height, radius
/// as a fraction of min(width, height).
struct Roi {
    double center_x = 0.5;
    double center_y = 0.5;
    double radius = 0.45;
};

struct CanopyPhoto {
    RgbImage image;
    Roi roi;
};

struct TransparencyResult {
    double ratio = 0.0;        // sky pixels / roi pixels
    double threshold = 0.0;    // luminance at or above which a pixel is sky
    Index roi_pixels = 0;
    bool degenerate = false;   // roi histogram had a single luminance level
};

inline double luminance(const Rgb& p) { return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]; }

/// Otsu threshold over a 256-bin histogram. Returns the first bin of the
/// upper (bright) class, or nullopt when fewer than two bins are occupied.
std::optional<int> otsu_threshold(std::span<const std::uint64_t, 256> histogram);

/// Sky fraction inside the roi. Pixels whose luminance is at or above the
/// threshold count as sky; the threshold comes from Otsu unless fixed.
TransparencyResult crown_transparency(const CanopyPhoto& photo, std::optional<double> fixed_threshold = {});

struct PenetrationEstimate {
    std::vector<double> per_photo_ratios;
    double factor = 0.0;
};

PenetrationEstimate penetration_from_ratios(std::vector<double> ratios);
PenetrationEstimate penetration_factor(std::span<const CanopyPhoto> photos,
                                       std::optional<double> fixed_threshold = {});

}  // namespace parksun
