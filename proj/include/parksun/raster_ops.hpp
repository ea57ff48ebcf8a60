#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "parksun/parallel.hpp"
#include "parksun/raster.hpp"

namespace parksun {

enum class ResampleMethod { nearest, mean };

template <class Scalar>
struct MinMax {
    Scalar min;
    Scalar max;
};

/// Replaces pixels where mask = 1 with `source`. Nodata in base stays nodata.
template <class Scalar>
BasicRaster<Scalar> substitute(const BasicRaster<Scalar>& base, const BinaryMask& mask, Scalar source) {
    require_same_grid(base.spec(), mask.spec(), "substitute");
    BasicRaster<Scalar> out = base;
    auto& v = out.values();
    const auto& m = mask.raster().values();
    v = (m == 1.0 && v != base.nodata()).select(source, v);
    return out;
}

template <class Scalar>
BasicRaster<Scalar> substitute(const BasicRaster<Scalar>& base, const BinaryMask& mask,
                               const BasicRaster<Scalar>& source) {
    require_same_grid(base.spec(), mask.spec(), "substitute");
    require_same_grid(base.spec(), source.spec(), "substitute");
    BasicRaster<Scalar> out = base;
    auto& v = out.values();
    const auto& m = mask.raster().values();
    // A nodata source pixel maps onto the base sentinel.
    const auto src = (source.values() == source.nodata()).select(base.nodata(), source.values());
    v = (m == 1.0 && v != base.nodata()).select(src, v);
    return out;
}

/// Per-pixel minimum of two or more rasters; nodata in any input wins.
template <class Scalar>
BasicRaster<Scalar> min_merge(const std::vector<std::reference_wrapper<const BasicRaster<Scalar>>>& inputs) {
    if (inputs.size() < 2)
        throw ArgumentError("min_merge needs at least 2 rasters, got " + std::to_string(inputs.size()));
    const BasicRaster<Scalar>& first = inputs.front();
    BasicRaster<Scalar> out = first;
    auto& v = out.values();
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> missing = v == first.nodata();
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        const BasicRaster<Scalar>& r = inputs[i];
        require_same_grid(first.spec(), r.spec(), "min_merge");
        missing = missing || (r.values() == r.nodata());
        v = v.min(r.values());
    }
    v = missing.select(first.nodata(), v);
    return out;
}

template <class Scalar, class... More>
BasicRaster<Scalar> min_merge(const BasicRaster<Scalar>& a, const BasicRaster<Scalar>& b, const More&... more) {
    return min_merge<Scalar>({std::cref(a), std::cref(b), std::cref(more)...});
}

/// Extrema over non-nodata pixels.
template <class Scalar>
MinMax<Scalar> min_max(const BasicRaster<Scalar>& r) {
    Scalar lo = std::numeric_limits<Scalar>::max();
    Scalar hi = std::numeric_limits<Scalar>::lowest();
    bool any = false;
    for (Scalar v : r.flat()) {
        if (r.is_nodata(v)) continue;
        any = true;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!any) throw EmptyRasterError("raster has no valid pixels");
    return {lo, hi};
}

/// Resamples onto another grid in the same CRS.
///
/// nearest: each target pixel takes the source pixel containing its center.
/// mean: each target pixel takes the mean of the valid source pixels whose
/// centers fall inside it; target pixels that contain no source center
/// (upsampling) fall back to nearest. Pixels outside the source extent are
/// nodata.
template <class Scalar>
BasicRaster<Scalar> resample_to(const BasicRaster<Scalar>& src, const GridSpec& target, ResampleMethod method) {
    target.validate();
    const GridSpec& s = src.spec();
    if (!s.overlaps(target)) throw ExtentError("source " + describe(s) + " does not overlap target " + describe(target));

    BasicRaster<Scalar> out(target, src.nodata(), src.nodata());
    auto nearest = [&](Index row, Index col) -> Scalar {
        const Index sc = s.col_of(target.x_center(col));
        const Index sr = s.row_of(target.y_center(row));
        return s.in_bounds(sr, sc) ? src(sr, sc) : src.nodata();
    };

    if (method == ResampleMethod::nearest) {
        parallel_rows(target.nrows, [&](Index r0, Index r1) {
            for (Index r = r0; r < r1; ++r)
                for (Index c = 0; c < target.ncols; ++c) out(r, c) = nearest(r, c);
        });
        return out;
    }

    Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(target.nrows, target.ncols);
    Eigen::ArrayXXi hits = Eigen::ArrayXXi::Zero(target.nrows, target.ncols);
    Eigen::ArrayXXi valid = Eigen::ArrayXXi::Zero(target.nrows, target.ncols);
    for (Index r = 0; r < s.nrows; ++r) {
        const Index tr = target.row_of(s.y_center(r));
        if (tr < 0 || tr >= target.nrows) continue;
        for (Index c = 0; c < s.ncols; ++c) {
            const Index tc = target.col_of(s.x_center(c));
            if (tc < 0 || tc >= target.ncols) continue;
            ++hits(tr, tc);
            const Scalar v = src(r, c);
            if (src.is_nodata(v)) continue;
            sum(tr, tc) += static_cast<double>(v);
            ++valid(tr, tc);
        }
    }
    for (Index r = 0; r < target.nrows; ++r)
        for (Index c = 0; c < target.ncols; ++c) {
            if (valid(r, c) > 0)
                out(r, c) = static_cast<Scalar>(sum(r, c) / valid(r, c));
            else if (hits(r, c) == 0)
                out(r, c) = nearest(r, c);
        }
    return out;
}

}  // namespace parksun
