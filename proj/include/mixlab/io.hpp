#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixlab/network.hpp"

namespace mixlab::io {

using json = nlohmann::json;

/// {"vertices":[{"id":str,"labels":[str]}],"edges":[{"u":str,"v":str,"w":float,"labels":[str]}]}
/// Edge labels are optional on input. An unordered pair may appear in both
/// orientations only if the weights agree; it is stored once.
json network_to_json(const WeightedNetwork& net);
WeightedNetwork network_from_json(const json& j);

WeightedNetwork load_network(const std::filesystem::path& path);
void save_network(const WeightedNetwork& net, const std::filesystem::path& path);

/// Partition as JSON array of arrays of vertex ids.
std::vector<std::vector<Vertex>> partition_from_json(const WeightedNetwork& net, const json& j);

/// Writes "t,value" rows. Doubles are printed with 17 significant digits so
/// reruns are byte-identical.
void write_profile_csv(const std::filesystem::path& path, const std::vector<double>& times,
                       const std::vector<double>& values, const std::string& header = "t,value",
                       const std::vector<std::string>& trailer = {});

std::string format_double(double x);

/// FNV-1a over the canonical dump of a config.
std::string config_hash(const json& config);

}  // namespace mixlab::io

namespace mixlab::io {

/// Comma-separated table; numeric cells use format_double.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows, const std::vector<std::string>& trailer = {});

}  // namespace mixlab::io
