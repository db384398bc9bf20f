// Python bindings. Networks and reports cross the boundary as JSON text; the
// package wrapper turns them into dicts.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mixlab/chain.hpp"
#include "mixlab/constructions.hpp"
#include "mixlab/distances.hpp"
#include "mixlab/experiments.hpp"
#include "mixlab/hitting.hpp"
#include "mixlab/io.hpp"
#include "mixlab/spectral.hpp"

namespace py = pybind11;
using namespace mixlab;

namespace {

WeightedNetwork parse_network(const std::string& text) { return io::network_from_json(json::parse(text)); }

std::vector<State> ids_to_states(const WeightedNetwork& net, const std::vector<std::string>& ids) {
    std::vector<State> out;
    for (const auto& id : ids) out.push_back(net.at(id));
    return out;
}

}  // namespace

PYBIND11_MODULE(_mixlab, m) {
    m.doc() = "mixlab core";

    py::register_exception<Rejection>(m, "Rejection", PyExc_ValueError);

    m.def("build", [](const std::string& family, const std::string& params) {
        Built b = build_family(family, json::parse(params));
        return py::make_tuple(io::network_to_json(b.network).dump(), b.metadata.dump());
    });

    m.def("kernel", [](const std::string& network, double delta) {
        const Chain c = build_chain(parse_network(network), delta);
        const auto n = static_cast<py::ssize_t>(c.size());
        py::array_t<double> P({n, n});
        auto dense = c.dense();
        std::copy(dense.begin(), dense.end(), P.mutable_data());
        py::array_t<double> pi(n);
        std::copy(c.stationary().begin(), c.stationary().end(), pi.mutable_data());
        return py::make_tuple(P, pi);
    });

    m.def("profile", [](const std::string& network, double delta, const std::string& kind, std::size_t t_max,
                        std::optional<std::vector<std::string>> starts) {
        const auto net = parse_network(network);
        const Chain c = build_chain(net, delta);
        StateSet s;
        if (starts) s = ids_to_states(net, *starts);
        if (kind == "tv") return tv_profile(c, t_max, s).values;
        if (kind == "separation") return separation_profile(c, t_max, s).values;
        if (kind == "l2") return l2_profile(c, t_max, s).values;
        throw Rejection("unknown profile kind '" + kind + "'");
    });

    m.def("spectrum", [](const std::string& network, double delta) {
        const auto sp = spectrum(build_chain(parse_network(network), delta));
        return json{{"eigenvalues", sp.eigenvalues}, {"lambda2", sp.lambda2}, {"lambda_min", sp.lambda_min},
                    {"gap", sp.gap},                 {"t_rel", sp.t_rel},     {"method", sp.method}}
            .dump();
    });

    m.def("hitting_pmf", [](const std::string& network, double delta, const std::string& start,
                            const std::vector<std::string>& targets, std::size_t horizon) {
        const auto net = parse_network(network);
        const auto h = hitting_pmf(build_chain(net, delta), net.at(start), ids_to_states(net, targets), horizon);
        return py::make_tuple(h.mass, h.residual);
    });

    m.def("experiment_names", &experiment_names);
    m.def("run_experiment", [](const std::string& name, const std::string& overrides) {
        return run_experiment(name, json::parse(overrides)).to_json().dump();
    });

    m.def("psi", [](double alpha, double r, bool printed) {
        const auto p = rate_function_psi(alpha, r, printed ? PsiForm::Printed : PsiForm::Consistent);
        return py::make_tuple(p.value, p.lambda_star, p.lambda_alpha);
    });
    m.def("theorem3_window", [](int m_, int b) {
        const auto w = theorem3_window(m_, b);
        return py::make_tuple(w.threshold, w.g, w.fraction);
    });
    m.def("fact41_bias", &fact41_bias_check);
    m.def("fact41_limit", &fact41_limit);
}
