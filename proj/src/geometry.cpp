#include "parksun/geometry.hpp"

namespace parksun {

bool contains(const Polygon& poly, const Point2& p) {
    bool inside = false;
    for (const Ring& ring : poly.rings) {
        const std::size_t n = ring.size();
        if (n < 3) continue;
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Point2& a = ring[i];
            const Point2& b = ring[j];
            if ((a.y() > p.y()) != (b.y() > p.y())) {
                const double x_cross = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
                if (p.x() < x_cross) inside = !inside;
            }
        }
    }
    return inside;
}

void validate_polygon(const Polygon& poly) {
    if (poly.rings.empty()) throw GeometryError("polygon has no rings");
    for (std::size_t k = 0; k < poly.rings.size(); ++k) {
        const Ring& ring = poly.rings[k];
        std::size_t distinct = ring.size();
        if (distinct >= 2 && ring.front() == ring.back()) --distinct;
        if (distinct < 3)
            throw GeometryError("polygon ring " + std::to_string(k) + " has " + std::to_string(distinct) +
                                " vertices, need at least 3");
        for (const Point2& p : ring)
            if (!p.allFinite()) throw GeometryError("polygon ring " + std::to_string(k) + " has a non-finite vertex");
    }
}

BinaryMask rasterize_polygons(const std::vector<Polygon>& polys, const GridSpec& spec) {
    Raster mask(spec, 0.0);
    for (const Polygon& poly : polys) {
        validate_polygon(poly);
        for_each_covered_pixel(poly, spec, [&](Index r, Index c) { mask(r, c) = 1.0; });
    }
    return BinaryMask(std::move(mask));
}

}  // namespace parksun
