#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "parksun/error.hpp"

namespace parksun {

using Index = Eigen::Index;

inline constexpr double kDefaultNodata = -9999.0;

/// Georeferencing of a north-up grid with square pixels.
///
/// The origin is the lower-left corner of the grid. Row 0 is the northernmost
/// row, so the center of pixel (row, col) sits at
/// (x_origin + (col + 0.5) * cell_size, y_origin + (nrows - row - 0.5) * cell_size).
/// Cell membership is half-open: [x0, x0 + cs) x [y0, y0 + cs).
struct GridSpec {
    Index ncols = 1;
    Index nrows = 1;
    double x_origin = 0.0;
    double y_origin = 0.0;
    double cell_size = 0.5;

    void validate() const {
        if (ncols < 1 || nrows < 1)
            throw ShapeError("grid must have at least one row and column, got " +
                             std::to_string(nrows) + "x" + std::to_string(ncols));
        if (!(cell_size > 0.0) || !std::isfinite(cell_size))
            throw ShapeError("cell_size must be positive, got " + std::to_string(cell_size));
        if (!std::isfinite(x_origin) || !std::isfinite(y_origin))
            throw ShapeError("grid origin must be finite");
    }

    Index size() const { return ncols * nrows; }
    double x_max() const { return x_origin + static_cast<double>(ncols) * cell_size; }
    double y_max() const { return y_origin + static_cast<double>(nrows) * cell_size; }

    double x_center(Index col) const { return x_origin + (static_cast<double>(col) + 0.5) * cell_size; }
    double y_center(Index row) const {
        return y_origin + (static_cast<double>(nrows - row) - 0.5) * cell_size;
    }

    // Column/row containing a coordinate; may be out of range.
    Index col_of(double x) const { return static_cast<Index>(std::floor((x - x_origin) / cell_size)); }
    Index row_of(double y) const {
        return nrows - 1 - static_cast<Index>(std::floor((y - y_origin) / cell_size));
    }

    bool in_bounds(Index row, Index col) const { return row >= 0 && row < nrows && col >= 0 && col < ncols; }

    // Same pixel layout. Origins and cell size compare with a relative
    // tolerance so grids read back from text files still match.
    bool same_grid(const GridSpec& o) const {
        if (ncols != o.ncols || nrows != o.nrows) return false;
        constexpr double origin_tol = 1e-6;  // meters
        return std::abs(cell_size - o.cell_size) <= 1e-9 * cell_size &&
               std::abs(x_origin - o.x_origin) <= origin_tol && std::abs(y_origin - o.y_origin) <= origin_tol;
    }

    bool overlaps(const GridSpec& o) const {
        return x_origin < o.x_max() && o.x_origin < x_max() && y_origin < o.y_max() && o.y_origin < y_max();
    }
};

inline std::string describe(const GridSpec& g) {
    return std::to_string(g.nrows) + "x" + std::to_string(g.ncols) + " @" + std::to_string(g.cell_size) +
           " m from (" + std::to_string(g.x_origin) + ", " + std::to_string(g.y_origin) + ")";
}

/// Dense georeferenced grid. Values are row-major, row 0 north, and every
/// stored value is either finite or equal to the nodata sentinel.
template <class Scalar>
class BasicRaster {
public:
    using scalar_type = Scalar;
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    BasicRaster() : BasicRaster(GridSpec{}) {}

    explicit BasicRaster(const GridSpec& spec, Scalar fill = Scalar(kDefaultNodata),
                         Scalar nodata = Scalar(kDefaultNodata))
        : spec_(spec), nodata_(nodata) {
        spec_.validate();
        values_ = Array::Constant(spec_.nrows, spec_.ncols, fill);
    }

    BasicRaster(const GridSpec& spec, Array values, Scalar nodata = Scalar(kDefaultNodata))
        : spec_(spec), values_(std::move(values)), nodata_(nodata) {
        spec_.validate();
        if (values_.rows() != spec_.nrows || values_.cols() != spec_.ncols)
            throw ShapeError("value array is " + std::to_string(values_.rows()) + "x" +
                             std::to_string(values_.cols()) + ", grid is " + std::to_string(spec_.nrows) +
                             "x" + std::to_string(spec_.ncols));
        check_values();
    }

    const GridSpec& spec() const { return spec_; }
    Scalar nodata() const { return nodata_; }
    Index rows() const { return spec_.nrows; }
    Index cols() const { return spec_.ncols; }
    Index size() const { return spec_.size(); }

    const Array& values() const { return values_; }
    Array& values() { return values_; }

    Scalar operator()(Index row, Index col) const { return values_(row, col); }
    Scalar& operator()(Index row, Index col) { return values_(row, col); }

    Scalar at(Index row, Index col) const {
        if (!spec_.in_bounds(row, col))
            throw IndexError("pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                             ") outside " + std::to_string(rows()) + "x" + std::to_string(cols()) + " grid");
        return values_(row, col);
    }

    std::span<const Scalar> flat() const { return {values_.data(), static_cast<std::size_t>(values_.size())}; }
    std::span<Scalar> flat() { return {values_.data(), static_cast<std::size_t>(values_.size())}; }

    bool is_nodata(Scalar v) const { return v == nodata_; }
    bool is_nodata(Index row, Index col) const { return values_(row, col) == nodata_; }

    Index count_valid() const { return (values_ != nodata_).count(); }

    void check_values() const {
        const auto* p = values_.data();
        for (Index i = 0; i < values_.size(); ++i)
            if (!(std::isfinite(static_cast<double>(p[i])) || p[i] == nodata_))
                throw ArgumentError("raster value at flat index " + std::to_string(i) +
                                    " is neither finite nor nodata");
    }

    bool operator==(const BasicRaster& o) const {
        return spec_.same_grid(o.spec_) && nodata_ == o.nodata_ && (values_ == o.values_).all();
    }

private:
    GridSpec spec_;
    Array values_;
    Scalar nodata_;
};

using Raster = BasicRaster<double>;

/// Raster restricted to {0, 1, nodata}.
class BinaryMask {
public:
    BinaryMask() = default;
    explicit BinaryMask(Raster r) : raster_(std::move(r)) {
        for (double v : raster_.flat())
            if (v != 0.0 && v != 1.0 && !raster_.is_nodata(v))
                throw ArgumentError("mask value " + std::to_string(v) + " is not 0, 1 or nodata");
    }

    static BinaryMask zeros(const GridSpec& spec) { return BinaryMask(Raster(spec, 0.0)); }

    const Raster& raster() const { return raster_; }
    const GridSpec& spec() const { return raster_.spec(); }
    bool is_set(Index row, Index col) const { return raster_(row, col) == 1.0; }
    bool is_nodata(Index row, Index col) const { return raster_.is_nodata(row, col); }
    Index count_set() const { return (raster_.values() == 1.0).count(); }

    bool operator==(const BinaryMask& o) const { return raster_ == o.raster_; }

private:
    Raster raster_;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!a.same_grid(b))
        throw ShapeError(std::string(what) + ": grid mismatch (" + describe(a) + " vs " + describe(b) + ")");
}

}  // namespace parksun
