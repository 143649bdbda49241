#include "qflp/ingestion.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace qflp::ingestion {

namespace {

// ascending id: numeric when both ids are numbers, lexicographic otherwise
bool id_less(const std::string& a, const std::string& b) {
    auto as_number = [](const std::string& s) -> std::optional<double> {
        if (s.empty()) return std::nullopt;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size()) return std::nullopt;
        return v;
    };
    const auto na = as_number(a), nb = as_number(b);
    if (na && nb && *na != *nb) return *na < *nb;
    return a < b;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// intermediate graph under construction, keyed by node id
struct Builder {
    std::map<std::string, Node, decltype(&id_less)> nodes{&id_less};
    // key: ordered id pair
    std::map<std::pair<std::string, std::string>, std::optional<double>> edges;

    void add_edge(const std::string& u, const std::string& v, std::optional<double> latency) {
        if (u == v) return;  // no self-loops
        auto key = u < v ? std::make_pair(u, v) : std::make_pair(v, u);
        auto [it, inserted] = edges.try_emplace(key, latency);
        if (!inserted && latency) {
            // keep the shorter connection when both carry a latency
            it->second = it->second ? std::min(*it->second, *latency) : *latency;
        }
    }

    std::map<std::string, std::vector<std::pair<std::string, std::optional<double>>>>
    adjacency() const {
        std::map<std::string, std::vector<std::pair<std::string, std::optional<double>>>> adj;
        for (const auto& [key, lat] : edges) {
            adj[key.first].push_back({key.second, lat});
            adj[key.second].push_back({key.first, lat});
        }
        return adj;
    }

    // drop coordinate-less nodes (ascending id), bridging their neighbors
    void remove_unlocated(Topology& topo) {
        std::vector<std::string> doomed;
        for (const auto& [id, node] : nodes)
            if (!node.latitude || !node.longitude) doomed.push_back(id);
        for (const std::string& id : doomed) {
            std::vector<std::pair<std::string, std::optional<double>>> neigh;
            for (auto it = edges.begin(); it != edges.end();) {
                if (it->first.first == id)
                    neigh.push_back({it->first.second, it->second});
                else if (it->first.second == id)
                    neigh.push_back({it->first.first, it->second});
                else {
                    ++it;
                    continue;
                }
                it = edges.erase(it);
            }
            for (std::size_t i = 0; i < neigh.size(); ++i)
                for (std::size_t j = i + 1; j < neigh.size(); ++j) {
                    std::optional<double> lat;
                    if (neigh[i].second && neigh[j].second)
                        lat = *neigh[i].second + *neigh[j].second;
                    add_edge(neigh[i].first, neigh[j].first, lat);
                }
            nodes.erase(id);
            ++topo.removed_nodes;
        }
    }

    void keep_largest_component(Topology& topo) {
        const auto adj = adjacency();
        std::map<std::string, int> comp;
        int n_comp = 0;
        for (const auto& [id, node] : nodes) {
            if (comp.count(id)) continue;
            std::queue<std::string> bfs;
            bfs.push(id);
            comp[id] = n_comp;
            while (!bfs.empty()) {
                auto cur = bfs.front();
                bfs.pop();
                auto it = adj.find(cur);
                if (it == adj.end()) continue;
                for (const auto& [next, lat] : it->second)
                    if (nodes.count(next) && !comp.count(next)) {
                        comp[next] = n_comp;
                        bfs.push(next);
                    }
            }
            ++n_comp;
        }
        if (n_comp <= 1) return;
        std::vector<std::size_t> sizes(n_comp, 0);
        for (const auto& [id, c] : comp) ++sizes[c];
        const int keep = static_cast<int>(
            std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
        for (auto it = nodes.begin(); it != nodes.end();)
            it = comp[it->first] == keep ? std::next(it) : nodes.erase(it);
        for (auto it = edges.begin(); it != edges.end();)
            it = nodes.count(it->first.first) && nodes.count(it->first.second)
                     ? std::next(it)
                     : edges.erase(it);
        topo.removed_components = static_cast<std::size_t>(n_comp - 1);
        topo.warnings.push_back("discarded " + std::to_string(n_comp - 1) +
                                " smaller component(s)");
    }

    Topology finish(std::string name, bool drop_unlocated) {
        Topology topo;
        topo.name = std::move(name);
        if (drop_unlocated) remove_unlocated(topo);
        keep_largest_component(topo);
        if (nodes.empty()) throw std::invalid_argument("topology: no nodes after preprocessing");

        std::map<std::string, std::size_t> index;
        for (const auto& [id, node] : nodes) {
            index[id] = topo.nodes.size();
            topo.nodes.push_back(node);
        }
        for (const auto& [key, lat] : edges) {
            Edge e;
            e.u = index.at(key.first);
            e.v = index.at(key.second);
            if (e.u > e.v) std::swap(e.u, e.v);
            e.latency_ms = lat;
            topo.edges.push_back(e);
            ++topo.nodes[e.u].degree;
            ++topo.nodes[e.v].degree;
        }
        std::sort(topo.edges.begin(), topo.edges.end(), [](const Edge& a, const Edge& b) {
            return a.u != b.u ? a.u < b.u : a.v < b.v;
        });
        return topo;
    }
};

std::vector<std::string> tokenize_without_comments(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            // split parentheses into their own tokens
            std::string cur;
            for (char c : tok) {
                if (c == '(' || c == ')') {
                    if (!cur.empty()) tokens.push_back(cur);
                    cur.clear();
                    tokens.push_back(std::string(1, c));
                } else {
                    cur += c;
                }
            }
            if (!cur.empty()) tokens.push_back(cur);
        }
    }
    return tokens;
}

std::optional<double> to_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::optional<std::size_t> Topology::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return i;
    return std::nullopt;
}

Topology parse_graphml_topology(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw std::invalid_argument(std::string("graphml: malformed XML: ") + e.what());
    }
    auto root = tree.get_child_optional("graphml");
    if (!root) throw std::invalid_argument("graphml: missing <graphml> root");

    // map data-key ids to semantic roles via their attr.name
    std::string lat_key, lon_key, latency_key, name_key;
    for (const auto& [tag, child] : *root) {
        if (tag != "key") continue;
        const auto id = child.get<std::string>("<xmlattr>.id", "");
        // '/' separator: the attribute is literally named "attr.name"
        const auto attr = lower(child.get<std::string>(
            pt::ptree::path_type("<xmlattr>/attr.name", '/'), ""));
        if (attr == "latitude" || attr == "lat") lat_key = id;
        if (attr == "longitude" || attr == "lon" || attr == "long") lon_key = id;
        if (attr.find("latency") != std::string::npos) latency_key = id;
        if (attr == "label" && name_key.empty()) name_key = id;
    }

    auto graph = root->get_child_optional("graph");
    if (!graph) throw std::invalid_argument("graphml: missing <graph>");

    Builder b;
    auto data_value = [](const pt::ptree& el, const std::string& key) -> std::optional<double> {
        if (key.empty()) return std::nullopt;
        for (const auto& [tag, child] : el) {
            if (tag != "data") continue;
            if (child.get<std::string>("<xmlattr>.key", "") != key) continue;
            return to_double(child.get_value<std::string>(""));
        }
        return std::nullopt;
    };
    for (const auto& [tag, child] : *graph) {
        if (tag == "node") {
            Node n;
            n.id = child.get<std::string>("<xmlattr>.id", "");
            if (n.id.empty()) throw std::invalid_argument("graphml: node without id");
            n.latitude = data_value(child, lat_key);
            n.longitude = data_value(child, lon_key);
            b.nodes.insert({n.id, n});
        } else if (tag == "edge") {
            const auto u = child.get<std::string>("<xmlattr>.source", "");
            const auto v = child.get<std::string>("<xmlattr>.target", "");
            if (u.empty() || v.empty()) throw std::invalid_argument("graphml: edge without endpoints");
            b.add_edge(u, v, data_value(child, latency_key));
        }
    }
    for (const auto& [key, lat] : b.edges)
        if (!b.nodes.count(key.first) || !b.nodes.count(key.second))
            throw std::invalid_argument("graphml: edge references unknown node");

    return b.finish(tree.get<std::string>("graphml.graph.<xmlattr>.id", "graphml"), true);
}

Topology parse_sndlib_topology(const std::string& text) {
    const auto tokens = tokenize_without_comments(text);
    Builder b;

    auto find_section = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
            if (tokens[i] == name && tokens[i + 1] == "(") return i + 2;
        return std::nullopt;
    };

    auto nodes_at = find_section("NODES");
    if (!nodes_at) throw std::invalid_argument("sndlib: missing NODES section");
    for (std::size_t i = *nodes_at; i < tokens.size() && tokens[i] != ")";) {
        if (i + 4 < tokens.size() && tokens[i + 1] == "(" && tokens[i + 4] == ")") {
            Node n;
            n.id = tokens[i];
            n.longitude = to_double(tokens[i + 2]);
            n.latitude = to_double(tokens[i + 3]);
            if (!n.longitude || !n.latitude)
                throw std::invalid_argument("sndlib: node " + n.id + " without coordinates");
            b.nodes.insert({n.id, n});
            i += 5;
        } else {
            throw std::invalid_argument("sndlib: malformed NODES entry near '" + tokens[i] + "'");
        }
    }

    auto links_at = find_section("LINKS");
    if (!links_at) throw std::invalid_argument("sndlib: missing LINKS section");
    int depth = 1;
    for (std::size_t i = *links_at; i < tokens.size() && depth > 0;) {
        if (tokens[i] == "(") {
            ++depth;
            ++i;
        } else if (tokens[i] == ")") {
            --depth;
            ++i;
        } else if (depth == 1 && i + 4 < tokens.size() && tokens[i + 1] == "(" &&
                   tokens[i + 4] == ")" && b.nodes.count(tokens[i + 2]) &&
                   b.nodes.count(tokens[i + 3])) {
            b.add_edge(tokens[i + 2], tokens[i + 3], std::nullopt);
            i += 5;
        } else {
            ++i;  // link attributes (costs, capacity groups)
        }
    }

    return b.finish("sndlib", true);
}

Topology parse_latency_matrix(const std::string& text) {
    Builder b;
    std::vector<std::string> warnings;
    // directional measurements, averaged per direction first
    std::map<std::pair<std::string, std::string>, std::pair<double, int>> directed;
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string i, j, ms;
        if (!(ls >> i)) continue;  // blank
        if (!(ls >> j >> ms))
            throw std::invalid_argument("latency matrix: malformed line " + std::to_string(lineno));
        const auto v = to_double(ms);
        if (!v || *v < 0.0)
            throw std::invalid_argument("latency matrix: bad latency on line " +
                                        std::to_string(lineno));
        if (i == j) continue;
        auto& cell = directed[{i, j}];
        cell.first += *v;
        ++cell.second;
    }
    if (directed.empty()) throw std::invalid_argument("latency matrix: no measurements");

    std::map<std::pair<std::string, std::string>, double> forward;
    for (const auto& [key, acc] : directed) forward[key] = acc.first / acc.second;
    for (const auto& [key, ms] : forward) {
        const auto& [i, j] = key;
        auto back = forward.find({j, i});
        if (back != forward.end() && i > j) continue;  // pair handled from the other side
        double value = ms;
        if (back != forward.end() && std::abs(back->second - ms) > 1e-12) {
            // conflicting directions: documented averaging rule
            value = 0.5 * (ms + back->second);
            std::ostringstream w;
            w << "asymmetric latency " << i << "<->" << j << " (" << ms << " vs " << back->second
              << "), averaged to " << value;
            warnings.push_back(w.str());
        }
        b.nodes.try_emplace(i, Node{i, std::nullopt, std::nullopt, 0});
        b.nodes.try_emplace(j, Node{j, std::nullopt, std::nullopt, 0});
        b.add_edge(i, j, value);
    }
    // nodes that only appear as a source of a self-measurement were dropped
    auto topo = b.finish("latency-matrix", false);
    for (auto& w : warnings) topo.warnings.push_back(std::move(w));
    return topo;
}

double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kEarthRadiusKm = 6371.0;
    const double rad = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * rad, dlon = (lon2 - lon1) * rad;
    const double s = std::sin(dlat / 2), t = std::sin(dlon / 2);
    const double h = s * s + std::cos(lat1 * rad) * std::cos(lat2 * rad) * t * t;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<std::vector<double>> all_pairs_rtt(const Topology& topo, double ms_per_km) {
    const std::size_t n = topo.nodes.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (const Edge& e : topo.edges) {
        double w;
        if (e.latency_ms) {
            w = *e.latency_ms;
        } else {
            const Node& a = topo.nodes[e.u];
            const Node& b = topo.nodes[e.v];
            if (!a.latitude || !a.longitude || !b.latitude || !b.longitude)
                throw std::invalid_argument("all_pairs_rtt: edge " + a.id + "-" + b.id +
                                            " has neither latency nor coordinates");
            // one-way propagation delay, doubled for the round trip
            w = 2.0 * ms_per_km *
                great_circle_km(*a.latitude, *a.longitude, *b.latitude, *b.longitude);
        }
        adj[e.u].push_back({e.v, w});
        adj[e.v].push_back({e.u, w});
    }

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, kInf));
    for (std::size_t s = 0; s < n; ++s) {
        auto& d = dist[s];
        d[s] = 0.0;
        using Item = std::pair<double, std::size_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        heap.push({0.0, s});
        while (!heap.empty()) {
            auto [du, u] = heap.top();
            heap.pop();
            if (du > d[u]) continue;
            for (auto [v, w] : adj[u])
                if (du + w < d[v]) {
                    d[v] = du + w;
                    heap.push({d[v], v});
                }
        }
        for (double v : d)
            if (v == kInf) throw std::invalid_argument("all_pairs_rtt: topology is disconnected");
    }
    return dist;
}

std::vector<int> degrees(const Topology& topo) {
    std::vector<int> out(topo.nodes.size());
    for (std::size_t i = 0; i < topo.nodes.size(); ++i) out[i] = topo.nodes[i].degree;
    return out;
}

}  // namespace qflp::ingestion
