#include "mixlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mixlab::io {

json network_to_json(const WeightedNetwork& net) {
    json vs = json::array();
    for (Vertex v = 0; v < net.num_vertices(); ++v)
        vs.push_back({{"id", net.id(v)}, {"labels", net.labels(v)}});
    json es = json::array();
    for (const auto& e : net.edges()) {
        json je = {{"u", net.id(e.u)}, {"v", net.id(e.v)}, {"w", e.weight}};
        if (!e.labels.empty()) je["labels"] = e.labels;
        es.push_back(std::move(je));
    }
    return {{"vertices", std::move(vs)}, {"edges", std::move(es)}};
}

WeightedNetwork network_from_json(const json& j) {
    if (!j.is_object() || !j.contains("vertices") || !j.contains("edges"))
        throw Rejection("network JSON needs 'vertices' and 'edges'");
    WeightedNetwork net;
    for (const auto& jv : j.at("vertices")) {
        std::vector<std::string> labels;
        if (jv.contains("labels")) labels = jv.at("labels").get<std::vector<std::string>>();
        net.add_vertex(jv.at("id").get<std::string>(), std::move(labels));
    }
    std::set<std::pair<Vertex, Vertex>> seen;
    for (const auto& je : j.at("edges")) {
        const Vertex u = net.at(je.at("u").get<std::string>());
        const Vertex v = net.at(je.at("v").get<std::string>());
        const double w = je.at("w").get<double>();
        std::vector<std::string> labels;
        if (je.contains("labels")) labels = je.at("labels").get<std::vector<std::string>>();
        if (auto existing = net.edge_between(u, v)) {
            const auto& e = net.edge(*existing);
            if (seen.count({u, v}) || u == v)
                throw Rejection("edge {" + net.id(u) + "," + net.id(v) + "} listed twice");
            seen.insert({u, v});
            if (e.weight != w)
                throw Rejection("asymmetric weights on edge {" + net.id(u) + "," + net.id(v) + "}");
            continue;
        }
        seen.insert({u, v});
        net.add_edge(u, v, w, std::move(labels));
    }
    return net;
}

WeightedNetwork load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Rejection("cannot open network file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw Rejection("malformed network JSON: " + std::string(ex.what()));
    }
    return network_from_json(j);
}

void save_network(const WeightedNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Rejection("cannot write " + path.string());
    out << network_to_json(net).dump(1) << '\n';
}

std::vector<std::vector<Vertex>> partition_from_json(const WeightedNetwork& net, const json& j) {
    std::vector<std::vector<Vertex>> blocks;
    for (const auto& jb : j) {
        blocks.emplace_back();
        for (const auto& id : jb) blocks.back().push_back(net.at(id.get<std::string>()));
    }
    return blocks;
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_profile_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const std::vector<double>& values, const std::string& header,
                       const std::vector<std::string>& trailer) {
    std::ofstream out(path);
    if (!out) throw Rejection("cannot write " + path.string());
    out << header << '\n';
    for (std::size_t i = 0; i < values.size(); ++i)
        out << format_double(times[i]) << ',' << format_double(values[i]) << '\n';
    for (const auto& line : trailer) out << line << '\n';
}

std::string config_hash(const json& config) {
    const std::string s = config.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mixlab::io

namespace mixlab::io {

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows, const std::vector<std::string>& trailer) {
    std::ofstream out(path);
    if (!out) throw Rejection("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    for (const auto& line : trailer) out << line << '\n';
}

}  // namespace mixlab::io
