#include "parksun/zonal.hpp"

#include <cstdio>
#include <fstream>

namespace parksun {

const char* to_string(ZoneKind k) { return k == ZoneKind::parking ? "parking" : "road"; }

ZoneKind parse_zone_kind(const std::string& s) {
    if (s == "parking") return ZoneKind::parking;
    if (s == "road") return ZoneKind::road;
    throw ArgumentError("zone kind must be 'parking' or 'road', got '" + s + "'");
}

ZoneLabels rasterize_zones(const std::vector<ZonePolygon>& zones, const GridSpec& spec) {
    spec.validate();
    ZoneLabels out{Raster(spec), 0};
    for (std::size_t z = 0; z < zones.size(); ++z) {
        const ZonePolygon& zone = zones[z];
        if (zone.rings.empty() || zone.rings.front().size() < 4)
            throw GeometryError("zone '" + zone.id + "': outer ring needs at least 3 vertices");
        for (const Ring& ring : zone.rings)
            if (ring.size() < 4 || ring.front() != ring.back())
                throw GeometryError("zone '" + zone.id + "': ring is not closed");
        const Polygon poly{zone.rings};
        const double label = static_cast<double>(z);
        for_each_covered_pixel(poly, spec, [&](Index r, Index c) {
            double& cell = out.labels(r, c);
            if (!out.labels.is_nodata(cell) && cell != label) ++out.overlap_pixels;
            cell = label;
        });
    }
    return out;
}

std::vector<ZonalRow> zonal_means(const Raster& leaf_on, const Raster& leaf_off, const Raster& labels,
                                  const std::vector<ZonePolygon>& zones) {
    require_same_grid(leaf_on.spec(), leaf_off.spec(), "zonal_means");
    require_same_grid(leaf_on.spec(), labels.spec(), "zonal_means");
    struct Acc {
        double on_sum = 0, off_sum = 0;
        Index on_n = 0, off_n = 0, pixels = 0;
    };
    std::vector<Acc> acc(zones.size());
    for (Index r = 0; r < labels.rows(); ++r)
        for (Index c = 0; c < labels.cols(); ++c) {
            const double l = labels(r, c);
            if (labels.is_nodata(l)) continue;
            const auto z = static_cast<std::size_t>(l);
            if (l < 0 || z >= zones.size()) continue;
            Acc& a = acc[z];
            ++a.pixels;
            if (!leaf_on.is_nodata(r, c)) a.on_sum += leaf_on(r, c), ++a.on_n;
            if (!leaf_off.is_nodata(r, c)) a.off_sum += leaf_off(r, c), ++a.off_n;
        }
    std::vector<ZonalRow> rows;
    rows.reserve(zones.size());
    for (std::size_t z = 0; z < zones.size(); ++z) {
        ZonalRow row{zones[z].id, zones[z].kind, std::nullopt, std::nullopt, acc[z].pixels};
        if (acc[z].on_n > 0) row.leaf_on_mean = acc[z].on_sum / static_cast<double>(acc[z].on_n);
        if (acc[z].off_n > 0) row.leaf_off_mean = acc[z].off_sum / static_cast<double>(acc[z].off_n);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

std::string fixed2(const std::optional<double>& v) {
    if (!v) return {};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

}  // namespace

void write_zonal_csv(std::ostream& os, const std::vector<ZonalRow>& rows) {
    os << "id,kind,leaf_on_mean_whm2day,leaf_off_mean_whm2day,pixel_count\n";
    for (const auto& r : rows)
        os << csv_field(r.id) << ',' << to_string(r.kind) << ',' << fixed2(r.leaf_on_mean) << ','
           << fixed2(r.leaf_off_mean) << ',' << r.pixel_count << '\n';
}

void write_zonal_csv(const std::filesystem::path& path, const std::vector<ZonalRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_zonal_csv(out, rows);
}

}  // namespace parksun
