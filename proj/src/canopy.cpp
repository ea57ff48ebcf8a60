#include "parksun/canopy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace parksun {

std::optional<int> otsu_threshold(std::span<const std::uint64_t, 256> histogram) {
    double total = 0.0, weighted = 0.0;
    int occupied = 0;
    for (int i = 0; i < 256; ++i) {
        total += static_cast<double>(histogram[i]);
        weighted += i * static_cast<double>(histogram[i]);
        occupied += histogram[i] > 0;
    }
    if (occupied < 2) return std::nullopt;

    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    int best_t = 0;
    for (int t = 0; t < 255; ++t) {
        w0 += static_cast<double>(histogram[t]);
        sum0 += t * static_cast<double>(histogram[t]);
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (weighted - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    return best_t + 1;
}

namespace {

int luminance_bin(const Rgb& p) { return std::clamp(static_cast<int>(std::lround(luminance(p))), 0, 255); }

}  // namespace

TransparencyResult crown_transparency(const CanopyPhoto& photo, std::optional<double> fixed_threshold) {
    const RgbImage& img = photo.image;
    const Roi& roi = photo.roi;
    if (img.width < 1 || img.height < 1) throw ArgumentError("canopy photo is empty");
    const double w = static_cast<double>(img.width), h = static_cast<double>(img.height);
    const double cx = roi.center_x * w, cy = roi.center_y * h;
    const double rad = roi.radius * std::min(w, h);
    if (!(rad > 0.0) || cx - rad < 0.0 || cx + rad > w || cy - rad < 0.0 || cy + rad > h)
        throw ArgumentError("canopy roi does not fit inside the " + std::to_string(img.width) + "x" +
                            std::to_string(img.height) + " photo");

    std::array<std::uint64_t, 256> hist{};
    std::vector<const Rgb*> inside;
    for (Index r = 0; r < img.height; ++r)
        for (Index c = 0; c < img.width; ++c) {
            const double dx = static_cast<double>(c) + 0.5 - cx, dy = static_cast<double>(r) + 0.5 - cy;
            if (dx * dx + dy * dy > rad * rad) continue;
            inside.push_back(&img(r, c));
            ++hist[static_cast<std::size_t>(luminance_bin(img(r, c)))];
        }
    TransparencyResult out;
    out.roi_pixels = static_cast<Index>(inside.size());
    if (out.roi_pixels < 100)
        throw ArgumentError("canopy roi covers " + std::to_string(out.roi_pixels) + " pixels, need at least 100");

    Index sky = 0;
    if (fixed_threshold) {
        out.threshold = *fixed_threshold;
        for (const Rgb* p : inside) sky += luminance(*p) >= *fixed_threshold;
    } else {
        const auto t = otsu_threshold(hist);
        if (!t) {
            out.degenerate = true;
            out.threshold = luminance_bin(*inside.front());
            return out;
        }
        out.threshold = *t;
        for (const Rgb* p : inside) sky += luminance_bin(*p) >= *t;
    }
    out.ratio = static_cast<double>(sky) / static_cast<double>(out.roi_pixels);
    return out;
}

PenetrationEstimate penetration_from_ratios(std::vector<double> ratios) {
    if (ratios.empty()) throw ArgumentError("penetration factor needs at least one photo");
    for (double r : ratios)
        if (!(r >= 0.0 && r <= 1.0)) throw RangeError("crown transparency " + std::to_string(r) + " outside [0, 1]");
    // Summing in sorted order makes the mean independent of photo order.
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    PenetrationEstimate est;
    est.factor = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    est.per_photo_ratios = std::move(ratios);
    return est;
}

PenetrationEstimate penetration_factor(std::span<const CanopyPhoto> photos, std::optional<double> fixed_threshold) {
    if (photos.empty()) throw ArgumentError("penetration factor needs at least one photo");
    std::vector<double> ratios;
    ratios.reserve(photos.size());
    for (const auto& p : photos) ratios.push_back(crown_transparency(p, fixed_threshold).ratio);
    return penetration_from_ratios(std::move(ratios));
}

}  // namespace parksun
