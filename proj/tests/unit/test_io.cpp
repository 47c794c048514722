#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "mcoupler/error.hpp"
#include "mcoupler/io.hpp"

using namespace mcoupler;
using namespace mcoupler::io;

namespace {

Table parse(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

}  // namespace

TEST(Csv, ParsesHeaderCommentsAndBlankLines) {
    const Table t = parse("# written by hand\nphi,g_hz\n\n0.0,-1.5e6\n# mid comment\n0.25,2e6\n");
    ASSERT_EQ(t.header.size(), 2u);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1][1], 2e6);
    EXPECT_EQ(*t.column("g_hz"), 1u);
    EXPECT_FALSE(t.column("sigma_hz").has_value());
}

TEST(Csv, EmptyCellIsMissing) {
    const Table t = parse("height_m,phi_zero\n3e-6,\n4e-6,0.31\n");
    EXPECT_TRUE(std::isnan(t.rows[0][1]));
    EXPECT_EQ(t.rows[1][1], 0.31);
    EXPECT_THROW(gcurve_from_table(parse("phi,g_hz\n0,\n0.1,2\n0.2,3\n0.3,4\n0.4,5\n")), Error);
}

TEST(Csv, ColumnsMatchedByName) {
    const fit::GCurve c = gcurve_from_table(parse("g_hz,phi\n5,0.1\n6,0.2\n"));
    ASSERT_EQ(c.points.size(), 2u);
    EXPECT_EQ(c.points[0].phi, 0.1);
    EXPECT_EQ(c.points[0].g_hz, 5.0);
}

TEST(Csv, RejectsMalformedInput) {
    EXPECT_THROW(parse(""), Error);
    EXPECT_THROW(parse("phi,g_hz\n0.1\n"), Error);
    EXPECT_THROW(parse("phi,g_hz\n0.1,abc\n"), Error);
    EXPECT_THROW(parse("phi,g_hz\n0,1\n0.1,2,3\n"), Error);
    EXPECT_THROW(parse("phi,,g_hz\n"), Error);
    EXPECT_THROW(gcurve_from_table(parse("phi,g\n0,1\n")), Error);
    EXPECT_THROW(rbrun_from_table(parse("m,survival_mean\n1.5,0.9\n"), metrics::RbVariant::Reference),
                 Error);
    EXPECT_THROW(read_csv_file("/nonexistent/definitely/missing.csv"), Error);
}

TEST(Csv, GCurveRoundTrip) {
    fit::GCurve c;
    c.points = {{0.0, -1771234.5, 5e4}, {0.125, 0.1, 5e4}, {0.5, 2.9e6, 5e4}};
    std::ostringstream out;
    write_gcurve_csv(out, c);
    const fit::GCurve back = gcurve_from_table(parse(out.str()));
    ASSERT_EQ(back.points.size(), 3u);
    for (size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back.points[i].phi, c.points[i].phi);
        EXPECT_EQ(back.points[i].g_hz, c.points[i].g_hz);
        EXPECT_EQ(back.points[i].sigma_hz, c.points[i].sigma_hz);
    }
}

TEST(Csv, T1AndRbRoundTrip) {
    fit::T1Curve t;
    t.omega_r_hz = 7.4e9;
    t.kappa_r_hz = 1e6;
    t.points = {{6.5e9, 1.3e-5}, {6.9e9, 3.3e-6}};
    std::ostringstream out;
    write_t1curve_csv(out, t);
    const fit::T1Curve tb = t1curve_from_table(parse(out.str()), 7.4e9, 1e6);
    EXPECT_EQ(tb.points[1].t1_s, 3.3e-6);

    metrics::RbRun r;
    r.points = {{1, 0.98, 0.01}, {8, 0.9, 0.012}};
    std::ostringstream rout;
    write_rbrun_csv(rout, r);
    const metrics::RbRun rb = rbrun_from_table(parse(rout.str()), metrics::RbVariant::Interleaved);
    EXPECT_EQ(rb.points[1].m, 8);
    EXPECT_EQ(rb.points[1].sem, 0.012);
    EXPECT_EQ(rb.variant, metrics::RbVariant::Interleaved);
}

TEST(FormatNumber, ShortestRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -5.2e6, 9.3e7, 1e-300, 123456789.0, 0.0}) {
        EXPECT_EQ(std::stod(format_number(v)), v) << format_number(v);
    }
    EXPECT_EQ(format_number(0.5), "0.5");
}

TEST(Network, LoadsReferenceFile) {
    const NetworkFile f = load_network(MCOUPLER_DATA_DIR "/reference_network.json");
    EXPECT_EQ(f.network.nodes.size(), 9u);
    EXPECT_EQ(f.network.caps.size(), 16u);
    ASSERT_EQ(f.connections.size(), 2u);
    EXPECT_EQ(f.connections[0].kind, capnet::ConnectionKind::Bump);
    EXPECT_NEAR(f.connections[0].area_m2, 1e-8, 1e-20);
    EXPECT_NEAR(f.connections[0].fringe_f, 1e-15, 1e-27);
    EXPECT_NEAR(f.network.caps[0].farads, 75e-15, 1e-27);
    EXPECT_EQ(f.bump_height_m, 3.5e-6);
    EXPECT_EQ(f.network.element(capnet::ElementRole::Coupler).asymmetry_r, 0.4);
}

TEST(Network, RejectsSchemaViolations) {
    EXPECT_THROW(parse_network("not json"), Error);
    EXPECT_THROW(parse_network(R"({"schema": "other/1"})"), Error);
    EXPECT_THROW(parse_network(R"({"schema": "mcoupler.network/1", "nodes": 3})"), Error);
    EXPECT_THROW(parse_network(R"({"schema": "mcoupler.network/1",
        "nodes": [{"id": 0, "kind": "ground"}, {"id": 1, "kind": "island"}],
        "capacitances_ff": [], "elements": []})"),
                 Error);
    EXPECT_THROW(parse_network(R"({"schema": "mcoupler.network/1",
        "nodes": [{"id": 0, "kind": "ground"}, {"id": 1, "kind": "pad"}, {"id": 2, "kind": "pad"}],
        "capacitances_ff": [{"a": 1, "b": 0, "c_ff": 10}, {"a": 2, "b": 0, "c_ff": 10}],
        "elements": [],
        "connections": [{"a": 1, "b": 2, "kind": "paddle"}]})"),
                 Error);
}
