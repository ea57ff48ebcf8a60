#include "parksun/lidar.hpp"
#include "parksun/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace parksun {

void IngestConfig::validate() const {
    if (!(cell_size > 0.0)) throw ValidationError("ingest cell_size must be positive");
    if (!(z_min < z_max)) throw ValidationError("ingest z bounds must satisfy z_min < z_max");
}

PointFormat guess_point_format(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".las" ? PointFormat::las : PointFormat::xyz_text;
}

std::vector<PointRecord> read_points(const std::filesystem::path& path, PointFormat format) {
    return format == PointFormat::las ? read_las(path) : read_xyz_text(path);
}

std::vector<PointRecord> read_xyz_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open point file " + path.string());
    std::vector<PointRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        double x, y, z;
        long cls, ret;
        if (!(ls >> x >> y >> z >> cls >> ret))
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected \"x y z classification return_number\"");
        std::string extra;
        if (ls >> extra)
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": unexpected trailing field '" + extra + "'");
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": non-finite coordinate");
        if (cls < 0 || cls > 255)
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": classification out of range");
        if (ret < 1 || ret > 255)
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": return_number must be >= 1");
        out.push_back({x, y, z, static_cast<std::uint8_t>(cls), static_cast<std::uint8_t>(ret)});
    }
    return out;
}

void write_xyz_text(const std::filesystem::path& path, std::span<const PointRecord> points) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "# x y z classification return_number\n";
    for (const auto& p : points)
        out << p.x << ' ' << p.y << ' ' << p.z << ' ' << int(p.classification) << ' ' << int(p.return_number) << '\n';
}

// ---------------------------------------------------------------------------
// LAS

namespace {

template <class T>
T get_le(const std::vector<char>& buf, std::size_t offset) {
    T v;
    std::memcpy(&v, buf.data() + offset, sizeof(T));
    return v;  // LAS is little-endian, as are all supported hosts
}

template <class T>
void put_le(std::vector<char>& buf, std::size_t offset, T v) {
    std::memcpy(buf.data() + offset, &v, sizeof(T));
}

constexpr std::size_t kLas12HeaderSize = 227;
constexpr std::array<std::uint16_t, 4> kMinRecordLength{20, 28, 26, 34};

}  // namespace

std::vector<PointRecord> read_las(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open LAS file " + path.string());
    std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string name = path.string();
    auto fail = [&](std::size_t offset, const std::string& msg) -> ParseError {
        return ParseError(name + ": byte offset " + std::to_string(offset) + ": " + msg);
    };

    if (buf.size() < 4 || std::memcmp(buf.data(), "LASF", 4) != 0) throw fail(0, "missing LASF signature");
    if (buf.size() < kLas12HeaderSize) throw fail(buf.size(), "file ends inside the public header block");

    const auto major = get_le<std::uint8_t>(buf, 24);
    const auto minor = get_le<std::uint8_t>(buf, 25);
    if (major != 1 || minor < 2 || minor > 4)
        throw CapabilityError(name + ": unsupported LAS version " + std::to_string(major) + "." + std::to_string(minor));

    const auto header_size = get_le<std::uint16_t>(buf, 94);
    const auto point_offset = get_le<std::uint32_t>(buf, 96);
    const auto format = get_le<std::uint8_t>(buf, 104);
    const auto record_length = get_le<std::uint16_t>(buf, 105);
    std::uint64_t count = get_le<std::uint32_t>(buf, 107);

    if (header_size < kLas12HeaderSize || header_size > buf.size()) throw fail(94, "invalid header size " + std::to_string(header_size));
    if (point_offset < header_size || point_offset > buf.size())
        throw fail(96, "offset to point data " + std::to_string(point_offset) + " out of range");
    if (format > 3) throw CapabilityError(name + ": unsupported LAS point data format " + std::to_string(format));
    if (record_length < kMinRecordLength[format])
        throw fail(105, "point record length " + std::to_string(record_length) + " too short for format " + std::to_string(format));
    if (minor == 4 && count == 0 && header_size >= 255) count = get_le<std::uint64_t>(buf, 247);

    const double sx = get_le<double>(buf, 131), sy = get_le<double>(buf, 139), sz = get_le<double>(buf, 147);
    const double ox = get_le<double>(buf, 155), oy = get_le<double>(buf, 163), oz = get_le<double>(buf, 171);
    if (!(sx > 0) || !(sy > 0) || !(sz > 0)) throw fail(131, "scale factors must be positive");

    const std::uint64_t needed = point_offset + count * record_length;
    if (needed > buf.size())
        throw fail(buf.size(), "expected " + std::to_string(count) + " point records, file truncated");

    std::vector<PointRecord> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::size_t at = point_offset + i * record_length;
        PointRecord p;
        p.x = get_le<std::int32_t>(buf, at) * sx + ox;
        p.y = get_le<std::int32_t>(buf, at + 4) * sy + oy;
        p.z = get_le<std::int32_t>(buf, at + 8) * sz + oz;
        p.return_number = get_le<std::uint8_t>(buf, at + 14) & 0x07;
        p.classification = get_le<std::uint8_t>(buf, at + 15) & 0x1f;
        if (p.return_number == 0) p.return_number = 1;  // some writers leave it unset
        out.push_back(p);
    }
    return out;
}

void write_las(const std::filesystem::path& path, std::span<const PointRecord> points, double scale) {
    if (!(scale > 0)) throw ArgumentError("LAS scale must be positive");
    double ox = 0, oy = 0, oz = 0;
    double max_x = 0, max_y = 0, max_z = 0, min_x = 0, min_y = 0, min_z = 0;
    if (!points.empty()) {
        min_x = max_x = points[0].x;
        min_y = max_y = points[0].y;
        min_z = max_z = points[0].z;
        for (const auto& p : points) {
            min_x = std::min(min_x, p.x), max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y), max_y = std::max(max_y, p.y);
            min_z = std::min(min_z, p.z), max_z = std::max(max_z, p.z);
        }
        ox = std::floor(min_x), oy = std::floor(min_y), oz = std::floor(min_z);
    }

    std::vector<char> buf(kLas12HeaderSize + points.size() * 20, 0);
    std::memcpy(buf.data(), "LASF", 4);
    put_le<std::uint8_t>(buf, 24, 1);
    put_le<std::uint8_t>(buf, 25, 2);
    std::memcpy(buf.data() + 58, "parksun", 7);
    put_le<std::uint16_t>(buf, 94, kLas12HeaderSize);
    put_le<std::uint32_t>(buf, 96, kLas12HeaderSize);
    put_le<std::uint8_t>(buf, 104, 0);
    put_le<std::uint16_t>(buf, 105, 20);
    put_le<std::uint32_t>(buf, 107, static_cast<std::uint32_t>(points.size()));
    put_le<double>(buf, 131, scale), put_le<double>(buf, 139, scale), put_le<double>(buf, 147, scale);
    put_le<double>(buf, 155, ox), put_le<double>(buf, 163, oy), put_le<double>(buf, 171, oz);
    put_le<double>(buf, 179, max_x), put_le<double>(buf, 187, min_x);
    put_le<double>(buf, 195, max_y), put_le<double>(buf, 203, min_y);
    put_le<double>(buf, 211, max_z), put_le<double>(buf, 219, min_z);

    std::array<std::uint32_t, 5> by_return{};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const std::size_t at = kLas12HeaderSize + i * 20;
        put_le<std::int32_t>(buf, at, static_cast<std::int32_t>(std::llround((p.x - ox) / scale)));
        put_le<std::int32_t>(buf, at + 4, static_cast<std::int32_t>(std::llround((p.y - oy) / scale)));
        put_le<std::int32_t>(buf, at + 8, static_cast<std::int32_t>(std::llround((p.z - oz) / scale)));
        put_le<std::uint8_t>(buf, at + 14, static_cast<std::uint8_t>(std::min<int>(p.return_number, 7)));
        put_le<std::uint8_t>(buf, at + 15, static_cast<std::uint8_t>(p.classification & 0x1f));
        if (p.return_number >= 1 && p.return_number <= 5) ++by_return[p.return_number - 1];
    }
    for (std::size_t k = 0; k < 5; ++k) put_le<std::uint32_t>(buf, 111 + 4 * k, by_return[k]);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

// ---------------------------------------------------------------------------

std::vector<PointRecord> filter_noise(std::span<const PointRecord> points, const IngestConfig& cfg) {
    std::vector<PointRecord> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (cfg.noise_classes.contains(p.classification)) continue;
        if (!(p.z >= cfg.z_min && p.z <= cfg.z_max)) continue;
        out.push_back(p);
    }
    return out;
}

GridSpec grid_covering(std::span<const PointRecord> points, double cell_size) {
    if (points.empty()) throw EmptyRasterError("no points to grid");
    if (!(cell_size > 0)) throw ArgumentError("cell_size must be positive");
    double xmin = points[0].x, xmax = xmin, ymin = points[0].y, ymax = ymin;
    for (const auto& p : points) {
        xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
    }
    GridSpec g;
    g.cell_size = cell_size;
    g.x_origin = std::floor(xmin / cell_size) * cell_size;
    g.y_origin = std::floor(ymin / cell_size) * cell_size;
    g.ncols = static_cast<Index>(std::floor((xmax - g.x_origin) / cell_size)) + 1;
    g.nrows = static_cast<Index>(std::floor((ymax - g.y_origin) / cell_size)) + 1;
    return g;
}

namespace {

template <class Keep, class Better>
Raster reduce_points(std::span<const PointRecord> points, const GridSpec& spec, Keep keep, Better better) {
    spec.validate();
    Raster out(spec);
    for (const auto& p : points) {
        if (!keep(p)) continue;
        const Index c = spec.col_of(p.x);
        const Index r = spec.row_of(p.y);
        if (!spec.in_bounds(r, c)) continue;
        double& cell = out(r, c);
        if (out.is_nodata(cell) || better(p.z, cell)) cell = p.z;
    }
    return out;
}

}  // namespace

Raster grid_dsm(std::span<const PointRecord> points, const GridSpec& spec) {
    return reduce_points(
        points, spec, [](const PointRecord& p) { return p.return_number == 1; },
        [](double z, double cur) { return z > cur; });
}

Raster grid_dem(std::span<const PointRecord> points, const GridSpec& spec, const IngestConfig& cfg) {
    return reduce_points(
        points, spec, [&](const PointRecord& p) { return cfg.dem_classes.contains(p.classification); },
        [](double z, double cur) { return z < cur; });
}

Raster fill_voids(const Raster& r, int max_radius_cells) {
    if (max_radius_cells < 1) throw ArgumentError("fill_voids radius must be >= 1");
    struct Offset {
        int dr, dc, d2;
    };
    std::vector<Offset> offsets;
    const int rad = max_radius_cells;
    for (int dr = -rad; dr <= rad; ++dr)
        for (int dc = -rad; dc <= rad; ++dc) {
            const int d2 = dr * dr + dc * dc;
            if (d2 == 0 || d2 > rad * rad) continue;
            offsets.push_back({dr, dc, d2});
        }
    // Row-major order within equal distance implements the tie rule.
    std::stable_sort(offsets.begin(), offsets.end(), [](const Offset& a, const Offset& b) {
        if (a.d2 != b.d2) return a.d2 < b.d2;
        if (a.dr != b.dr) return a.dr < b.dr;
        return a.dc < b.dc;
    });

    Raster out = r;
    const GridSpec& g = r.spec();
    parallel_rows(g.nrows, [&](Index r0, Index r1) {
        for (Index row = r0; row < r1; ++row)
            for (Index col = 0; col < g.ncols; ++col) {
                if (!r.is_nodata(row, col)) continue;
                for (const auto& o : offsets) {
                    const Index rr = row + o.dr, cc = col + o.dc;
                    if (g.in_bounds(rr, cc) && !r.is_nodata(rr, cc)) {
                        out(row, col) = r(rr, cc);
                        break;
                    }
                }
            }
    });
    return out;
}

}  // namespace parksun
