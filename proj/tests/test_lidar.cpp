#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "parksun/lidar.hpp"
#include "scenes.hpp"

using namespace parksun;
using parksun::testing::TempDir;

namespace {

// Minimal LAS 1.2 file with one point per raw triple, built byte by byte.
std::vector<char> las_bytes(std::uint8_t minor, std::uint8_t format, std::uint16_t record_length,
                            const std::vector<std::array<std::int32_t, 3>>& raw, double scale, double offset,
                            std::uint8_t return_byte = 1, std::uint8_t class_byte = 2) {
    std::vector<char> b(227 + raw.size() * record_length, 0);
    auto put = [&](std::size_t at, auto v) { std::memcpy(b.data() + at, &v, sizeof(v)); };
    std::memcpy(b.data(), "LASF", 4);
    put(24, std::uint8_t{1});
    put(25, minor);
    put(94, std::uint16_t{227});
    put(96, std::uint32_t{227});
    put(104, format);
    put(105, record_length);
    put(107, static_cast<std::uint32_t>(raw.size()));
    for (std::size_t k = 0; k < 3; ++k) {
        put(131 + 8 * k, scale);
        put(155 + 8 * k, offset);
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const std::size_t at = 227 + i * record_length;
        put(at, raw[i][0]);
        put(at + 4, raw[i][1]);
        put(at + 8, raw[i][2]);
        put(at + 14, return_byte);
        put(at + 15, class_byte);
    }
    return b;
}

void write_bytes(const std::filesystem::path& p, const std::vector<char>& b) {
    std::ofstream out(p, std::ios::binary);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

const GridSpec kGrid{4, 4, 0.0, 0.0, 1.0};

}  // namespace

TEST(XyzText, ParsesRecord) {
    TempDir dir("xyz");
    std::ofstream(dir / "p.xyz") << "10.0 20.0 5.5 2 1\n";
    const auto pts = read_xyz_text(dir / "p.xyz");
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_EQ(pts[0].x, 10.0);
    EXPECT_EQ(pts[0].y, 20.0);
    EXPECT_EQ(pts[0].z, 5.5);
    EXPECT_EQ(pts[0].classification, 2);
    EXPECT_EQ(pts[0].return_number, 1);
}

TEST(XyzText, SkipsComments) {
    TempDir dir("xyz");
    std::ofstream(dir / "p.xyz") << "# header\n1 2 3 2 1\n  # indented\n\n4 5 6 5 2\n7 8 9 11 1\n";
    EXPECT_EQ(read_xyz_text(dir / "p.xyz").size(), 3u);
}

TEST(XyzText, MalformedLineNamesLine) {
    TempDir dir("xyz");
    std::ofstream(dir / "p.xyz") << "1 2 3 2 1\n1 2 oops 2 1\n";
    try {
        read_xyz_text(dir / "p.xyz");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
    std::ofstream(dir / "q.xyz") << "1 2 3 2 0\n";
    EXPECT_THROW(read_xyz_text(dir / "q.xyz"), ParseError);
}

TEST(Las, ScaleAndOffset) {
    TempDir dir("las");
    write_bytes(dir / "a.las", las_bytes(2, 0, 20, {{500, 700, -200}}, 0.01, 100.0));
    const auto pts = read_las(dir / "a.las");
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_DOUBLE_EQ(pts[0].x, 105.0);
    EXPECT_DOUBLE_EQ(pts[0].y, 107.0);
    EXPECT_DOUBLE_EQ(pts[0].z, 98.0);
    EXPECT_EQ(pts[0].classification, 2);
}

TEST(Las, ReadsReturnAndClassBitfields) {
    TempDir dir("las");
    // return 2 of 3 (bits 0-2 = 2, bits 3-5 = 3); class 17 with the withheld flag set.
    write_bytes(dir / "a.las", las_bytes(3, 1, 28, {{0, 0, 0}}, 0.01, 0.0, 2 | (3 << 3), 17 | 0x80));
    const auto pts = read_las(dir / "a.las");
    EXPECT_EQ(pts[0].return_number, 2);
    EXPECT_EQ(pts[0].classification, 17);
}

TEST(Las, UnsupportedFormatNamesIt) {
    TempDir dir("las");
    write_bytes(dir / "a.las", las_bytes(4, 6, 30, {{0, 0, 0}}, 0.01, 0.0));
    try {
        read_las(dir / "a.las");
        FAIL() << "expected CapabilityError";
    } catch (const CapabilityError& e) {
        EXPECT_NE(std::string(e.what()).find("format 6"), std::string::npos) << e.what();
    }
}

TEST(Las, MalformedHeaderReportsOffset) {
    TempDir dir("las");
    write_bytes(dir / "a.las", std::vector<char>{'N', 'O', 'P', 'E'});
    EXPECT_THROW(read_las(dir / "a.las"), ParseError);

    auto b = las_bytes(2, 0, 20, {{0, 0, 0}, {1, 1, 1}}, 0.01, 0.0);
    b.resize(b.size() - 10);
    write_bytes(dir / "b.las", b);
    try {
        read_las(dir / "b.las");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos) << e.what();
    }
}

TEST(Las, WriterRoundTrip) {
    TempDir dir("las");
    const std::vector<PointRecord> pts{{1000.25, 2000.75, 101.5, 2, 1}, {1003.5, 2001.0, 99.25, 5, 3}};
    write_las(dir / "a.las", pts);
    const auto back = read_points(dir / "a.las", guess_point_format(dir / "a.las"));
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_NEAR(back[i].x, pts[i].x, 1e-9);
        EXPECT_NEAR(back[i].y, pts[i].y, 1e-9);
        EXPECT_NEAR(back[i].z, pts[i].z, 1e-9);
        EXPECT_EQ(back[i].classification, pts[i].classification);
        EXPECT_EQ(back[i].return_number, pts[i].return_number);
    }
}

TEST(FilterNoise, Rules) {
    const IngestConfig cfg;
    const std::vector<PointRecord> pts{{0, 0, 5, 7, 1}, {0, 0, 10000, 2, 1}, {1, 2, 3, 2, 1}, {0, 0, 5, 18, 1}};
    const auto kept = filter_noise(pts, cfg);
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept[0].x, 1);
    EXPECT_EQ(kept[0].y, 2);
    EXPECT_EQ(kept[0].z, 3);
}

TEST(GridDsm, MaxOfFirstReturns) {
    const std::vector<PointRecord> pts{{0.5, 3.5, 5, 5, 1}, {0.6, 3.4, 7, 5, 1}, {0.7, 3.3, 9, 5, 2}, {1.5, 3.5, 4, 2, 2}};
    const Raster dsm = grid_dsm(pts, kGrid);
    EXPECT_EQ(dsm(0, 0), 7.0);
    EXPECT_TRUE(dsm.is_nodata(0, 1));  // only a second return there
    EXPECT_TRUE(dsm.is_nodata(3, 3));
}

TEST(GridDsm, HalfOpenCells) {
    // (1, 1) is the west edge of column 1 and the south edge of row 2.
    const Raster dsm = grid_dsm(std::vector<PointRecord>{{1.0, 1.0, 3, 2, 1}}, kGrid);
    EXPECT_EQ(dsm(2, 1), 3.0);
    EXPECT_EQ(dsm.count_valid(), 1);
    // Points on the outer north/east boundary fall outside.
    EXPECT_EQ(grid_dsm(std::vector<PointRecord>{{4.0, 2.0, 3, 2, 1}}, kGrid).count_valid(), 0);
}

TEST(GridDem, MinOfDemClasses) {
    const IngestConfig cfg;
    const std::vector<PointRecord> pts{{0.5, 3.5, 2.0, 2, 1}, {0.5, 3.5, 1.8, 11, 1}, {1.5, 3.5, 5.0, 5, 1},
                                       {2.5, 3.5, 9.0, 17, 1}};
    const Raster dem = grid_dem(pts, kGrid, cfg);
    EXPECT_EQ(dem(0, 0), 1.8);
    EXPECT_TRUE(dem.is_nodata(0, 1));  // vegetation only
    EXPECT_EQ(dem(0, 2), 9.0);         // bridge deck
}

TEST(GridCovering, SnapsOutward) {
    const std::vector<PointRecord> pts{{10.2, 20.7, 0, 2, 1}, {12.9, 21.1, 0, 2, 1}};
    const GridSpec g = grid_covering(pts, 0.5);
    EXPECT_DOUBLE_EQ(g.x_origin, 10.0);
    EXPECT_DOUBLE_EQ(g.y_origin, 20.5);
    EXPECT_EQ(g.ncols, 6);
    EXPECT_EQ(g.nrows, 2);
    for (const auto& p : pts) EXPECT_TRUE(g.in_bounds(g.row_of(p.y), g.col_of(p.x)));
}

TEST(FillVoids, TieGoesToLowerIndex) {
    Raster r(GridSpec{3, 1, 0, 0, 1});
    r(0, 0) = 5;
    r(0, 2) = 7;
    EXPECT_EQ(fill_voids(r, 1)(0, 1), 5.0);
}

TEST(FillVoids, NoVoidsUnchanged) {
    Raster r(GridSpec{5, 4, 0, 0, 1});
    std::mt19937 rng(1);
    for (double& v : r.flat()) v = std::uniform_real_distribution<double>(0, 10)(rng);
    EXPECT_EQ(fill_voids(r, 3), r);
}

TEST(FillVoids, IsolatedVoidTakesSurroundings) {
    Raster r(GridSpec{5, 5, 0, 0, 1}, 4.25);
    r(2, 2) = r.nodata();
    EXPECT_EQ(fill_voids(r, 2)(2, 2), 4.25);
}

TEST(FillVoids, RadiusLimitsSearch) {
    Raster r(GridSpec{7, 1, 0, 0, 1});
    r(0, 0) = 1;
    const Raster out = fill_voids(r, 3);
    EXPECT_EQ(out(0, 3), 1.0);
    EXPECT_TRUE(out.is_nodata(0, 4));
}

TEST(FillVoids, UsesEuclideanDistance) {
    Raster r(GridSpec{5, 5, 0, 0, 1});
    r(0, 0) = 1;  // diagonal distance sqrt(8) from (2, 2)
    r(2, 4) = 2;  // straight distance 2
    EXPECT_EQ(fill_voids(r, 3)(2, 2), 2.0);
}
