#include "doctest.h"
#include "qflp/ingestion.hpp"

#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace qflp::ingestion;

namespace {

std::string graphml(const std::string& body) {
    return "<?xml version='1.0' encoding='utf-8'?>\n"
           "<graphml>\n"
           "  <key id='d_lat' for='node' attr.name='Latitude' attr.type='double'/>\n"
           "  <key id='d_lon' for='node' attr.name='Longitude' attr.type='double'/>\n"
           "  <key id='d_ms' for='edge' attr.name='LinkLatency' attr.type='double'/>\n"
           "  <graph id='test' edgedefault='undirected'>\n" +
           body + "  </graph>\n</graphml>\n";
}

std::string located_node(const std::string& id, double lat, double lon) {
    std::ostringstream out;
    out << "<node id='" << id << "'><data key='d_lat'>" << lat << "</data>"
        << "<data key='d_lon'>" << lon << "</data></node>\n";
    return out.str();
}

}  // namespace

TEST_SUITE("ingestion") {

TEST_CASE("graphml: middle node without coordinates is bridged away") {
    auto topo = parse_graphml_topology(graphml(located_node("a", 0.0, 0.0) +
                                               "<node id='m'/>\n" +
                                               located_node("b", 1.0, 0.0) +
                                               "<edge source='a' target='m'/>\n"
                                               "<edge source='m' target='b'/>\n"));
    REQUIRE(topo.nodes.size() == 2);
    CHECK(topo.removed_nodes == 1);
    REQUIRE(topo.edges.size() == 1);
    CHECK(topo.nodes[topo.edges[0].u].id == "a");
    CHECK(topo.nodes[topo.edges[0].v].id == "b");
    CHECK(topo.nodes[0].degree == 1);
}

TEST_CASE("graphml: chain of unlocated nodes removed in ascending id order") {
    auto topo = parse_graphml_topology(graphml(located_node("a", 0.0, 0.0) +
                                               "<node id='m1'/>\n<node id='m2'/>\n" +
                                               located_node("b", 2.0, 0.0) +
                                               "<edge source='a' target='m1'/>\n"
                                               "<edge source='m1' target='m2'/>\n"
                                               "<edge source='m2' target='b'/>\n"));
    REQUIRE(topo.nodes.size() == 2);
    CHECK(topo.removed_nodes == 2);
    REQUIRE(topo.edges.size() == 1);
}

TEST_CASE("graphml: fully located graph is kept as-is") {
    auto topo = parse_graphml_topology(graphml(
        located_node("a", 0.0, 0.0) + located_node("b", 1.0, 0.0) + located_node("c", 2.0, 0.0) +
        "<edge source='a' target='b'/>\n<edge source='b' target='c'/>\n"));
    CHECK(topo.nodes.size() == 3);
    CHECK(topo.edges.size() == 2);
    CHECK(topo.removed_nodes == 0);
    CHECK(topo.removed_components == 0);
    CHECK(degrees(topo) == std::vector<int>{1, 2, 1});
}

TEST_CASE("graphml: only the largest component survives") {
    auto topo = parse_graphml_topology(graphml(
        located_node("a", 0.0, 0.0) + located_node("b", 1.0, 0.0) + located_node("c", 2.0, 0.0) +
        located_node("z", 9.0, 9.0) +
        "<edge source='a' target='b'/>\n<edge source='b' target='c'/>\n"));
    CHECK(topo.nodes.size() == 3);
    CHECK(topo.removed_components == 1);
    CHECK_FALSE(topo.index_of("z").has_value());
    CHECK(topo.warnings.size() == 1);
}

TEST_CASE("graphml: errors") {
    CHECK_THROWS_AS(parse_graphml_topology("<graphml><graph><node id="), std::invalid_argument);
    CHECK_THROWS_AS(parse_graphml_topology("<notgraphml/>"), std::invalid_argument);
    // every node unlocated -> nothing left
    CHECK_THROWS_AS(parse_graphml_topology(graphml("<node id='a'/>\n<node id='b'/>\n"
                                                   "<edge source='a' target='b'/>\n")),
                    std::invalid_argument);
}

TEST_CASE("coordinates 111 km apart give about 2.22 ms RTT") {
    CHECK(great_circle_km(0.0, 0.0, 1.0, 0.0) == doctest::Approx(111.19).epsilon(1e-3));
    auto topo = parse_graphml_topology(graphml(located_node("a", 0.0, 0.0) +
                                               located_node("b", 1.0, 0.0) +
                                               "<edge source='a' target='b'/>\n"));
    auto rtt = all_pairs_rtt(topo);
    CHECK(rtt[0][1] == doctest::Approx(2.22).epsilon(0.005));
    CHECK(rtt[0][0] == 0.0);
}

TEST_CASE("explicit edge latency wins over coordinates") {
    auto topo = parse_graphml_topology(graphml(
        located_node("a", 0.0, 0.0) + located_node("b", 1.0, 0.0) +
        "<edge source='a' target='b'><data key='d_ms'>7.5</data></edge>\n"));
    auto rtt = all_pairs_rtt(topo);
    CHECK(rtt[0][1] == doctest::Approx(7.5));
}

TEST_CASE("latency matrix: reverse direction assumed equal") {
    auto topo = parse_latency_matrix("1 2 10\n");
    REQUIRE(topo.nodes.size() == 2);
    auto rtt = all_pairs_rtt(topo);
    CHECK(rtt[0][1] == doctest::Approx(10.0));
    CHECK(rtt[1][0] == doctest::Approx(10.0));
    CHECK(topo.warnings.empty());
}

TEST_CASE("latency matrix: asymmetric entries averaged with a warning") {
    auto topo = parse_latency_matrix("1 2 10\n2 1 20\n");
    REQUIRE(topo.warnings.size() == 1);
    CHECK(topo.warnings[0].find("averaged") != std::string::npos);
    auto rtt = all_pairs_rtt(topo);
    CHECK(rtt[0][1] == doctest::Approx(15.0));
}

TEST_CASE("latency matrix: comments, repeats, and errors") {
    auto topo = parse_latency_matrix("# comment\n1 2 10\n1 2 14\n\n2 3 5 # trailing\n");
    CHECK(topo.nodes.size() == 3);
    auto rtt = all_pairs_rtt(topo);
    CHECK(rtt[0][1] == doctest::Approx(12.0));  // repeated measurements averaged

    CHECK_THROWS_AS(parse_latency_matrix(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_latency_matrix("# only a comment\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_latency_matrix("1 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_latency_matrix("1 2 fast\n"), std::invalid_argument);
}

TEST_CASE("shortest path takes the two-hop detour") {
    auto topo = parse_latency_matrix("1 2 1\n2 3 1\n1 3 3\n");
    auto rtt = all_pairs_rtt(topo);
    const auto i1 = *topo.index_of("1"), i3 = *topo.index_of("3");
    CHECK(rtt[i1][i3] == doctest::Approx(2.0));
}

TEST_CASE("all_pairs_rtt rejects disconnected topologies") {
    Topology topo;
    topo.nodes = {{"a", 0.0, 0.0, 0}, {"b", 1.0, 1.0, 0}};
    CHECK_THROWS_AS(all_pairs_rtt(topo), std::invalid_argument);
}

TEST_CASE("rtt matrix properties: symmetric, zero diagonal, triangle inequality") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> nn(2, 8);
        std::uniform_real_distribution<double> ms(0.5, 30.0);
        const int n = nn(rng);
        std::ostringstream text;
        for (int i = 0; i + 1 < n; ++i) text << i << ' ' << i + 1 << ' ' << ms(rng) << '\n';
        for (int extra = 0; extra < n; ++extra) {
            std::uniform_int_distribution<int> pick(0, n - 1);
            const int i = pick(rng), j = pick(rng);
            if (i != j) text << i << ' ' << j << ' ' << ms(rng) << '\n';
        }
        auto topo = parse_latency_matrix(text.str());
        auto rtt = all_pairs_rtt(topo);
        const std::size_t m = topo.nodes.size();
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(rtt[i][i] == 0.0);
            for (std::size_t j = 0; j < m; ++j) {
                CHECK(rtt[i][j] == doctest::Approx(rtt[j][i]).epsilon(1e-12));
                for (std::size_t k = 0; k < m; ++k)
                    CHECK(rtt[i][j] <= rtt[i][k] + rtt[k][j] + 1e-9);
            }
        }
    }
}

TEST_CASE("sndlib: nodes and links with nested attribute groups") {
    const std::string text =
        "?SNDlib native format; type: network; version: 1.0\n"
        "NODES (\n"
        "  n1 ( 0.00 0.00 )\n"
        "  n2 ( 0.00 1.00 )\n"
        "  n3 ( 1.00 1.00 )\n"
        ")\n"
        "LINKS (\n"
        "  L12 ( n1 n2 ) 0.00 0.00 0.00 0.00 ( 40.00 2000.00 )\n"
        "  L23 ( n2 n3 ) 0.00 0.00 0.00 0.00 ( 40.00 2000.00 )\n"
        ")\n";
    auto topo = parse_sndlib_topology(text);
    REQUIRE(topo.nodes.size() == 3);
    CHECK(topo.edges.size() == 2);
    CHECK(*topo.nodes[*topo.index_of("n2")].latitude == doctest::Approx(1.0));
    CHECK(*topo.nodes[*topo.index_of("n2")].longitude == doctest::Approx(0.0));
    auto rtt = all_pairs_rtt(topo);
    CHECK(rtt[*topo.index_of("n1")][*topo.index_of("n2")] ==
          doctest::Approx(2.22).epsilon(0.005));

    CHECK_THROWS_AS(parse_sndlib_topology("LINKS ( )"), std::invalid_argument);
}

}  // TEST_SUITE
