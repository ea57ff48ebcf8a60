#pragma once

#include <vector>

#include <Eigen/Core>

#include "parksun/raster.hpp"

namespace parksun {

using Point2 = Eigen::Vector2d;
using Ring = std::vector<Point2>;

/// Planar polygon in the shared projected CRS. The first ring is the outer
/// boundary, the rest are holes; containment uses the even-odd rule over all
/// rings.
struct Polygon {
    std::vector<Ring> rings;
};

/// Even-odd crossing test. An edge counts when it straddles the horizontal
/// line through p (one endpoint strictly above, the other at or below) and
/// crosses it strictly to the right of p, which makes boundary points
/// deterministic: points on left/bottom edges are inside, right/top are out.
bool contains(const Polygon& poly, const Point2& p);

/// Rejects rings with fewer than 3 distinct vertices.
void validate_polygon(const Polygon& poly);

/// Calls fn(row, col) for each pixel whose center lies inside poly.
template <class Fn>
void for_each_covered_pixel(const Polygon& poly, const GridSpec& spec, Fn&& fn);

/// Mask of pixel centers covered by any polygon.
BinaryMask rasterize_polygons(const std::vector<Polygon>& polys, const GridSpec& spec);

// ---------------------------------------------------------------------------

template <class Fn>
void for_each_covered_pixel(const Polygon& poly, const GridSpec& spec, Fn&& fn) {
    if (poly.rings.empty() || poly.rings.front().empty()) return;
    double xmin = poly.rings.front().front().x(), xmax = xmin;
    double ymin = poly.rings.front().front().y(), ymax = ymin;
    for (const Ring& ring : poly.rings)
        for (const Point2& p : ring) {
            xmin = std::min(xmin, p.x());
            xmax = std::max(xmax, p.x());
            ymin = std::min(ymin, p.y());
            ymax = std::max(ymax, p.y());
        }
    const Index c0 = std::max<Index>(0, spec.col_of(xmin) - 1);
    const Index c1 = std::min<Index>(spec.ncols - 1, spec.col_of(xmax) + 1);
    const Index r0 = std::max<Index>(0, spec.row_of(ymax) - 1);
    const Index r1 = std::min<Index>(spec.nrows - 1, spec.row_of(ymin) + 1);
    for (Index r = r0; r <= r1; ++r)
        for (Index c = c0; c <= c1; ++c)
            if (contains(poly, Point2(spec.x_center(c), spec.y_center(r)))) fn(r, c);
}

}  // namespace parksun
