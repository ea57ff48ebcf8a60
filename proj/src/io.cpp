#include "parksun/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#ifdef PARKSUN_HAVE_PNG
#include <png.h>
#endif

namespace parksun {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

// Shortest text that reads back to the same double.
std::string exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool parse_double(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = first + tok.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

}  // namespace

// ---------------------------------------------------------------------------
// ESRI ASCII grid

Raster read_grid(std::istream& is, const std::string& source_name) {
    auto fail = [&](std::size_t line, const std::string& msg) {
        return ParseError(source_name + ":" + std::to_string(line) + ": " + msg);
    };

    std::map<std::string, double> header;
    bool x_center = false, y_center = false;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::pair<std::string, std::size_t>> pending;  // first data line tokens

    while (std::getline(is, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (!std::isalpha(static_cast<unsigned char>(key[0]))) {
            std::string tok = key;
            do pending.emplace_back(tok, line_no);
            while (ls >> tok);
            break;
        }
        const std::string k = lower(key);
        std::string value_tok;
        double value = 0.0;
        if (!(ls >> value_tok) || !parse_double(value_tok, value))
            throw fail(line_no, "header key '" + key + "' has no numeric value");
        std::string extra;
        if (ls >> extra) throw fail(line_no, "unexpected token '" + extra + "' after header value");

        std::string canonical;
        if (k == "ncols" || k == "nrows" || k == "cellsize" || k == "nodata_value") canonical = k;
        else if (k == "xllcorner" || k == "xllcenter") canonical = "xll", x_center = k == "xllcenter";
        else if (k == "yllcorner" || k == "yllcenter") canonical = "yll", y_center = k == "yllcenter";
        else if (k == "dx" || k == "dy") throw fail(line_no, "anisotropic cells (" + key + ") are not supported");
        else throw fail(line_no, "unexpected header key '" + key + "'");
        if (header.contains(canonical)) throw fail(line_no, "duplicate header key '" + key + "'");
        header[canonical] = value;
    }
    for (const char* required : {"ncols", "nrows", "xll", "yll", "cellsize"})
        if (!header.contains(required))
            throw fail(line_no, std::string("missing header key '") +
                                    (std::strcmp(required, "xll") == 0   ? "xllcorner"
                                     : std::strcmp(required, "yll") == 0 ? "yllcorner"
                                                                         : required) +
                                    "'");

    GridSpec g;
    const double nc = header["ncols"], nr = header["nrows"];
    if (nc < 1 || nr < 1 || nc != std::floor(nc) || nr != std::floor(nr))
        throw fail(1, "ncols and nrows must be positive integers");
    g.ncols = static_cast<Index>(nc);
    g.nrows = static_cast<Index>(nr);
    g.cell_size = header["cellsize"];
    if (!(g.cell_size > 0)) throw fail(1, "cellsize must be positive");
    g.x_origin = header["xll"] - (x_center ? g.cell_size / 2 : 0.0);
    g.y_origin = header["yll"] - (y_center ? g.cell_size / 2 : 0.0);
    const double nodata = header.contains("nodata_value") ? header["nodata_value"] : kDefaultNodata;

    Raster r(g, nodata, nodata);
    const Index expected = g.size();
    Index found = 0;
    double* out = r.values().data();
    auto take = [&](const std::string& tok, std::size_t at) {
        double v;
        if (!parse_double(tok, v)) throw fail(at, "invalid value '" + tok + "'");
        if (found >= expected)
            throw fail(at, "too many values: expected " + std::to_string(g.nrows) + " rows of " + std::to_string(g.ncols));
        if (v != nodata && !std::isfinite(v)) throw fail(at, "non-finite value '" + tok + "'");
        out[found++] = v;
    };
    for (const auto& [tok, at] : pending) take(tok, at);
    while (std::getline(is, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) take(tok, line_no);
    }
    if (found != expected)
        throw fail(line_no, "expected " + std::to_string(g.nrows) + " rows (" + std::to_string(expected) +
                                " values), found " + std::to_string(found / g.ncols) + " complete rows (" +
                                std::to_string(found) + " values)");
    return r;
}

Raster read_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open grid " + path.string());
    return read_grid(in, path.string());
}

void write_grid(std::ostream& os, const Raster& r) {
    const GridSpec& g = r.spec();
    const std::string nodata = exact(r.nodata());
    os << "ncols " << g.ncols << '\n'
       << "nrows " << g.nrows << '\n'
       << "xllcorner " << exact(g.x_origin) << '\n'
       << "yllcorner " << exact(g.y_origin) << '\n'
       << "cellsize " << exact(g.cell_size) << '\n'
       << "NODATA_value " << nodata << '\n';
    std::string row;
    for (Index i = 0; i < g.nrows; ++i) {
        row.clear();
        for (Index j = 0; j < g.ncols; ++j) {
            if (j) row += ' ';
            const double v = r(i, j);
            row += r.is_nodata(v) ? nodata : sig6(v);
        }
        row += '\n';
        os << row;
    }
}

void write_grid(const Raster& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write grid " + path.string());
    write_grid(out, r);
    if (!out) throw IoError("failed writing grid " + path.string());
}

// ---------------------------------------------------------------------------
// Images

RgbImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image " + path.string());
    auto token = [&]() {
        std::string tok;
        int ch;
        while ((ch = in.get()) != EOF) {
            if (ch == '#') {
                while ((ch = in.get()) != EOF && ch != '\n') {}
                continue;
            }
            if (std::isspace(ch)) {
                if (!tok.empty()) break;
                continue;
            }
            tok += static_cast<char>(ch);
        }
        return tok;
    };
    const std::string magic = token();
    if (magic != "P6") throw ParseError(path.string() + ": not a binary PPM (P6) file");
    long w = 0, h = 0, maxval = 0;
    try {
        w = std::stol(token());
        h = std::stol(token());
        maxval = std::stol(token());
    } catch (const std::exception&) {
        throw ParseError(path.string() + ": malformed PPM header");
    }
    if (w < 1 || h < 1) throw ParseError(path.string() + ": invalid PPM dimensions");
    if (maxval != 255) throw CapabilityError(path.string() + ": PPM maxval must be 255, got " + std::to_string(maxval));
    RgbImage img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(w * h * 3));
    if (in.gcount() != w * h * 3) throw ParseError(path.string() + ": PPM pixel data truncated");
    return img;
}

void write_ppm(const RgbImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image " + path.string());
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size() * 3));
}

bool png_supported() {
#ifdef PARKSUN_HAVE_PNG
    return true;
#else
    return false;
#endif
}

RgbImage read_png(const std::filesystem::path& path) {
#ifdef PARKSUN_HAVE_PNG
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw ParseError(path.string() + ": " + image.message);
    image.format = PNG_FORMAT_RGB;
    RgbImage img(image.width, image.height);
    if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw ParseError(path.string() + ": " + image.message);
    }
    return img;
#else
    throw CapabilityError(path.string() + ": built without PNG support");
#endif
}

void write_png(const RgbImage& img, const std::filesystem::path& path) {
#ifdef PARKSUN_HAVE_PNG
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels.data(), 0, nullptr))
        throw IoError(path.string() + ": " + image.message);
#else
    (void)img;
    throw CapabilityError(path.string() + ": built without PNG support");
#endif
}

RgbImage read_image(const std::filesystem::path& path) {
    return lower(path.extension().string()) == ".png" ? read_png(path) : read_ppm(path);
}

GridSpec read_world_file(const std::filesystem::path& path, Index width, Index height) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open world file " + path.string());
    double v[6];
    for (int i = 0; i < 6; ++i) {
        std::string tok;
        if (!(in >> tok) || !parse_double(tok, v[i]))
            throw ParseError(path.string() + ":" + std::to_string(i + 1) + ": expected a number");
    }
    const double a = v[0], d = v[1], b = v[2], e = v[3], c = v[4], f = v[5];
    if (d != 0.0 || b != 0.0) throw CapabilityError(path.string() + ": rotated world files are not supported");
    if (!(a > 0.0) || !(e < 0.0)) throw ParseError(path.string() + ": expected positive pixel width and negative height");
    if (std::abs(a + e) > 1e-9 * a) throw CapabilityError(path.string() + ": pixels are not square");
    GridSpec g;
    g.ncols = width;
    g.nrows = height;
    g.cell_size = a;
    g.x_origin = c - a / 2.0;
    g.y_origin = (f + a / 2.0) - static_cast<double>(height) * a;
    return g;
}

void write_world_file(const GridSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write world file " + path.string());
    out << exact(spec.cell_size) << "\n0\n0\n" << exact(-spec.cell_size) << '\n'
        << exact(spec.x_origin + spec.cell_size / 2.0) << '\n'
        << exact(spec.y_max() - spec.cell_size / 2.0) << '\n';
}

std::filesystem::path find_world_file(const std::filesystem::path& image) {
    std::string ext = image.extension().string();
    if (!ext.empty() && ext[0] == '.') ext.erase(0, 1);
    std::vector<std::filesystem::path> candidates;
    if (!ext.empty()) {
        candidates.push_back(std::filesystem::path(image).replace_extension("." + ext + "w"));
        candidates.push_back(std::filesystem::path(image).replace_extension(std::string(".") + ext.front() + ext.back() + "w"));
    }
    candidates.push_back(std::filesystem::path(image).replace_extension(".wld"));
    for (const auto& c : candidates)
        if (std::filesystem::exists(c)) return c;
    throw IoError("no world file found next to " + image.string());
}

RgbImage read_georeferenced_image(const std::filesystem::path& path) {
    RgbImage img = read_image(path);
    img.anchor = read_world_file(find_world_file(path), img.width, img.height);
    return img;
}

// ---------------------------------------------------------------------------
// GeoJSON

namespace {

using nlohmann::json;

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": byte " + std::to_string(e.byte) + ": invalid JSON");
    }
}

std::vector<Ring> parse_rings(const json& coords, const std::string& where) {
    if (!coords.is_array()) throw ParseError(where + ": polygon coordinates must be an array");
    std::vector<Ring> rings;
    for (const json& jr : coords) {
        if (!jr.is_array()) throw ParseError(where + ": ring must be an array of positions");
        Ring ring;
        for (const json& pos : jr) {
            if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
                throw ParseError(where + ": position must be [x, y]");
            ring.emplace_back(pos[0].get<double>(), pos[1].get<double>());
        }
        rings.push_back(std::move(ring));
    }
    return rings;
}

// Calls fn(geometry, properties, feature_index) for every geometry.
template <class Fn>
void visit_geometries(const json& j, const std::string& where, Fn&& fn, std::size_t index = 0) {
    const std::string type = j.value("type", "");
    if (type == "FeatureCollection") {
        const json& features = j.at("features");
        for (std::size_t i = 0; i < features.size(); ++i)
            visit_geometries(features[i], where + " feature " + std::to_string(i), fn, i);
    } else if (type == "Feature") {
        if (!j.contains("geometry") || j["geometry"].is_null()) return;
        fn(j["geometry"], j.contains("properties") && j["properties"].is_object() ? j["properties"] : json::object(),
           where, index);
    } else if (type == "GeometryCollection") {
        for (const json& g : j.at("geometries")) visit_geometries(g, where, fn, index);
    } else if (!type.empty()) {
        fn(j, json::object(), where, index);
    } else {
        throw ParseError(where + ": missing GeoJSON type");
    }
}

}  // namespace

std::vector<Polygon> read_geojson_polygons(const std::filesystem::path& path) {
    const json j = load_json(path);
    std::vector<Polygon> out;
    try {
        visit_geometries(j, path.string(), [&](const json& g, const json&, const std::string& where, std::size_t) {
            const std::string type = g.value("type", "");
            if (type == "Polygon") {
                out.push_back({parse_rings(g.at("coordinates"), where)});
            } else if (type == "MultiPolygon") {
                for (const json& part : g.at("coordinates")) out.push_back({parse_rings(part, where)});
            }
        });
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    for (const auto& p : out) validate_polygon(p);
    return out;
}

std::vector<ZonePolygon> read_geojson_zones(const std::filesystem::path& path) {
    const json j = load_json(path);
    std::vector<ZonePolygon> out;
    try {
        visit_geometries(j, path.string(), [&](const json& g, const json& props, const std::string& where, std::size_t i) {
            ZonePolygon zone;
            if (props.contains("id") && props["id"].is_string()) zone.id = props["id"].get<std::string>();
            else if (props.contains("id") && props["id"].is_number()) zone.id = props["id"].dump();
            else zone.id = "zone-" + std::to_string(i);
            if (!props.contains("kind") || !props["kind"].is_string())
                throw ParseError(where + ": zone '" + zone.id + "' has no 'kind' property");
            zone.kind = parse_zone_kind(props["kind"].get<std::string>());

            const std::string type = g.value("type", "");
            if (type == "Polygon") {
                zone.rings = parse_rings(g.at("coordinates"), where);
            } else if (type == "MultiPolygon") {
                for (const json& part : g.at("coordinates"))
                    for (auto& ring : parse_rings(part, where)) zone.rings.push_back(std::move(ring));
            } else {
                throw ParseError(where + ": zone '" + zone.id + "' is a " + type + ", expected a polygon");
            }
            out.push_back(std::move(zone));
        });
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return out;
}

namespace {

json rings_json(const std::vector<Ring>& rings) {
    json coords = json::array();
    for (const Ring& ring : rings) {
        json jr = json::array();
        for (const Point2& p : ring) jr.push_back({p.x(), p.y()});
        coords.push_back(std::move(jr));
    }
    return coords;
}

void save_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(1) << '\n';
}

}  // namespace

void write_geojson_zones(const std::vector<ZonePolygon>& zones, const std::filesystem::path& path) {
    json fc = {{"type", "FeatureCollection"}, {"features", json::array()}};
    for (const auto& z : zones)
        fc["features"].push_back({{"type", "Feature"},
                                  {"properties", {{"id", z.id}, {"kind", to_string(z.kind)}}},
                                  {"geometry", {{"type", "Polygon"}, {"coordinates", rings_json(z.rings)}}}});
    save_json(fc, path);
}

void write_geojson_polygons(const std::vector<Polygon>& polys, const std::filesystem::path& path) {
    json fc = {{"type", "FeatureCollection"}, {"features", json::array()}};
    for (const auto& p : polys)
        fc["features"].push_back({{"type", "Feature"},
                                  {"properties", json::object()},
                                  {"geometry", {{"type", "Polygon"}, {"coordinates", rings_json(p.rings)}}}});
    save_json(fc, path);
}

}  // namespace parksun
