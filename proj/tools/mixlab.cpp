// mixlab command line: build networks, compute distance profiles, run the
// registered experiments.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mixlab/chain.hpp"
#include "mixlab/constructions.hpp"
#include "mixlab/distances.hpp"
#include "mixlab/experiments.hpp"
#include "mixlab/io.hpp"

namespace fs = std::filesystem;
using namespace mixlab;

namespace {

constexpr int kPass = 0;
constexpr int kAssertionFailure = 1;
constexpr int kUsage = 2;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Rejection("cannot open config file " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Rejection("malformed config " + path + ": " + e.what());
    }
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Rejection("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

/// Parses "key=value" with value read as JSON, falling back to a string.
std::pair<std::string, json> parse_assignment(const std::string& a) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw Rejection("expected key=value, got '" + a + "'");
    const std::string key = a.substr(0, eq), raw = a.substr(eq + 1);
    try {
        return {key, json::parse(raw)};
    } catch (const json::exception&) {
        return {key, raw};
    }
}

// ------------------------------------------------------------------ build

struct BuildArgs {
    std::string family;
    std::string out;
    std::string config;
    std::vector<std::string> set;
};

int cmd_build(const BuildArgs& a, const json& flags) {
    json cfg = a.config.empty() ? json::object() : read_json_file(a.config);
    for (const auto& [k, v] : flags.items()) cfg[k] = v;
    for (const auto& s : a.set) {
        auto [k, v] = parse_assignment(s);
        cfg[k] = v;
    }
    Built b = build_family(a.family, cfg);
    b.network.require_connected();
    const std::string hash = io::config_hash({{"family", a.family}, {"params", cfg}});
    b.metadata["config"] = cfg;
    b.metadata["config_hash"] = hash;
    b.metadata["states"] = b.network.num_vertices();
    json net = io::network_to_json(b.network);
    net["config_hash"] = hash;
    const fs::path out(a.out);
    write_json_file(out, net);
    fs::path meta = out;
    meta.replace_extension(".meta.json");
    write_json_file(meta, b.metadata);
    std::cout << a.family << ": " << b.network.num_vertices() << " states -> " << out.string() << '\n';
    return kPass;
}

// ------------------------------------------------------------------ profile

struct ProfileArgs {
    std::string network;
    std::string kind = "tv";
    double delta = 0.5;
    std::string grid;
    double tol = 1e-9;
    std::string starts;
    std::string targets;
    std::size_t t_max = 100;
    std::string out;
};

StateSet resolve_states(const WeightedNetwork& net, const std::string& list) {
    if (list.empty() || list == "all") return std::nullopt;
    std::vector<State> s;
    for (const auto& id : split_list(list)) s.push_back(net.at(id));
    return s;
}

int cmd_profile(const ProfileArgs& a) {
    const WeightedNetwork net = io::load_network(a.network);
    const Chain chain = build_chain(net, a.delta);
    const StateSet starts = resolve_states(net, a.starts), targets = resolve_states(net, a.targets);
    DistanceProfile prof;
    if (!a.grid.empty()) {
        std::vector<double> grid;
        for (const auto& x : split_list(a.grid)) grid.push_back(std::stod(x));
        auto pair = continuous_profiles(chain, grid, a.tol, starts, targets);
        if (a.kind == "tv")
            prof = pair.tv;
        else if (a.kind == "separation")
            prof = pair.separation;
        else
            throw Rejection("continuous profiles support kinds tv and separation");
    } else if (a.kind == "tv") {
        prof = tv_profile(chain, a.t_max, starts);
    } else if (a.kind == "separation") {
        prof = separation_profile(chain, a.t_max, starts, targets);
    } else if (a.kind == "l2") {
        prof = l2_profile(chain, a.t_max, starts);
    } else {
        throw Rejection("unknown kind '" + a.kind + "'; use tv, separation or l2");
    }
    const json cfg = {{"network", io::network_to_json(net)}, {"kind", a.kind},  {"delta", a.delta},
                      {"grid", a.grid},  {"tol", a.tol}, {"starts", a.starts}, {"targets", a.targets},
                      {"t_max", a.t_max}};
    io::write_profile_csv(a.out, prof.times, prof.values, "t,value", {"# config_hash=" + io::config_hash(cfg)});
    return kPass;
}

// ------------------------------------------------------------------ experiment

struct ExperimentArgs {
    std::string name;
    std::string config;
    std::vector<std::string> set;
    std::string out;
};

int cmd_experiment(const ExperimentArgs& a) {
    json overrides = a.config.empty() ? json::object() : read_json_file(a.config);
    for (const auto& s : a.set) {
        auto [k, v] = parse_assignment(s);
        overrides[k] = v;
    }
    const auto res = run_experiment(a.name, overrides);
    const std::string hash = io::config_hash({{"experiment", res.name}, {"config", res.config}});
    for (const auto& c : res.checks)
        std::cout << c.criterion << ' ' << (c.pass ? "PASS" : "FAIL") << ' ' << c.name << ' ' << c.measured.dump()
                  << '\n';
    if (!a.out.empty()) {
        const fs::path dir(a.out);
        fs::create_directories(dir);
        json report = res.to_json();
        report["config_hash"] = hash;
        write_json_file(dir / (res.name + ".json"), report);
        for (const auto& [key, table] : res.tables)
            io::write_table_csv(dir / (key + ".csv"), table.header, table.rows, {"# config_hash=" + hash});
        std::ofstream log(dir / (res.name + ".log"));
        log << "seconds=" << res.seconds << '\n';
    }
    std::cout << res.name << ": " << (res.pass() ? "PASS" : "FAIL") << '\n';
    return res.pass() ? kPass : kAssertionFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixlab: mixing-time constructions and diagnostics"};
    app.require_subcommand(1);

    BuildArgs b;
    json build_flags = json::object();
    int n = 0, s = 0, depth = 0, C = 0, torus = 0;
    double delta = 0.0;
    std::uint64_t seed = 0;
    auto* build = app.add_subcommand("build", "generate a network family");
    build->add_option("family", b.family, "example33, theorem1, theorem2a, theorem2b1, theorem2b2, theorem2c, theorem3, "
                                          "torus3d, expander")
        ->required();
    build->add_option("--out,-o", b.out, "network JSON path (metadata goes next to it)")->required();
    build->add_option("--config", b.config, "JSON parameter file");
    build->add_option("--set", b.set, "extra parameter key=value (JSON value)");
    auto* o_n = build->add_option("--n", n);
    auto* o_delta = build->add_option("--delta", delta);
    auto* o_s = build->add_option("--s", s);
    auto* o_depth = build->add_option("--depth", depth);
    auto* o_C = build->add_option("--C", C);
    auto* o_torus = build->add_option("--torus", torus);
    auto* o_seed = build->add_option("--seed", seed);

    ProfileArgs p;
    auto* profile = app.add_subcommand("profile", "distance profile of a network's lazy walk");
    profile->add_option("network", p.network)->required()->check(CLI::ExistingFile);
    profile->add_option("--kind", p.kind, "tv, separation or l2");
    profile->add_option("--delta", p.delta, "holding probability");
    profile->add_option("--grid", p.grid, "comma-separated continuous times (heat kernel)");
    profile->add_option("--tol", p.tol, "heat kernel truncation tolerance");
    profile->add_option("--starts", p.starts, "comma-separated vertex ids, default all");
    profile->add_option("--targets", p.targets, "comma-separated vertex ids, default all");
    profile->add_option("--t-max", p.t_max);
    profile->add_option("--out,-o", p.out)->required();

    ExperimentArgs e;
    auto* experiment = app.add_subcommand("experiment", "run a registered experiment");
    experiment->add_option("name", e.name)->required();
    experiment->add_option("--config", e.config, "JSON overrides");
    experiment->add_option("--set", e.set, "override key=value (JSON value)");
    experiment->add_option("--out,-o", e.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (*build) {
            if (*o_n) build_flags["n"] = n;
            if (*o_delta) build_flags["delta"] = delta;
            if (*o_s) build_flags["s"] = s;
            if (*o_depth) build_flags["depth"] = depth;
            if (*o_C) build_flags["C"] = C;
            if (*o_torus) build_flags["torus"] = torus;
            if (*o_seed) build_flags["seed"] = seed;
            return cmd_build(b, build_flags);
        }
        if (*profile) return cmd_profile(p);
        if (*experiment) return cmd_experiment(e);
    } catch (const Rejection& r) {
        std::cerr << "error: " << r.what() << '\n';
        return kUsage;
    } catch (const json::exception& r) {
        std::cerr << "error: bad parameter: " << r.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
