#pragma once

#include <optional>
#include <string>
#include <vector>

// Topology parsing (GraphML, SNDlib native, latency triples) and all-pairs
// RTT computation over edge latencies or great-circle distances.
namespace qflp::ingestion {

struct Node {
    std::string id;
    std::optional<double> latitude;
    std::optional<double> longitude;
    int degree = 0;
};

struct Edge {
    std::size_t u = 0, v = 0;  // node indices
    std::optional<double> latency_ms;
};

struct Topology {
    std::string name;
    std::vector<Node> nodes;  // sorted by id
    std::vector<Edge> edges;  // u < v, no self-loops, no duplicates

    std::size_t removed_nodes = 0;       // dropped for missing coordinates
    std::size_t removed_components = 0;  // smaller components discarded
    std::vector<std::string> warnings;

    std::optional<std::size_t> index_of(const std::string& id) const;
};

// GraphML (topology-zoo style): node coordinates from data keys named
// Latitude/Longitude, optional edge latency from a key whose name contains
// "latency". Preprocessing: nodes without coordinates are removed in
// ascending id order with their neighbors reconnected pairwise (latencies
// added along the bypassed node when both sides carry one), then only the
// largest connected component is kept. Throws std::invalid_argument on
// malformed XML or when nothing remains.
Topology parse_graphml_topology(const std::string& text);

// SNDlib native format: NODES ( id ( x y ) ... ) and LINKS ( id ( u v )
// ... ); x is longitude, y latitude. Same component filtering as GraphML.
Topology parse_sndlib_topology(const std::string& text);

// Whitespace-separated "i j latency_ms" triples, one per line; '#' starts a
// comment. The reverse direction is assumed equal; conflicting asymmetric
// pairs are averaged with a warning. Throws std::invalid_argument when no
// measurement parses.
Topology parse_latency_matrix(const std::string& text);

// Great-circle distance in km (haversine, mean earth radius 6371 km).
double great_circle_km(double lat1, double lon1, double lat2, double lon2);

// Shortest-path RTT matrix in ms. Edge weight: the explicit latency when
// present, otherwise great-circle distance times ms_per_km one way, doubled
// for the round trip. Throws std::invalid_argument when an edge has neither
// latency nor coordinates, or when the topology is disconnected.
std::vector<std::vector<double>> all_pairs_rtt(const Topology& topo, double ms_per_km = 0.01);

// Node degrees in edge order (helper for resource placement schemes).
std::vector<int> degrees(const Topology& topo);

}  // namespace qflp::ingestion
