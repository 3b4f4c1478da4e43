// Python bindings. Structured values cross the boundary as JSON text; the
// package wrapper decodes them.

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lagraph/engine.hpp"
#include "lagraph/util.hpp"

namespace py = pybind11;
using namespace lagraph;

namespace {

std::unique_ptr<Engine> open_engine(const std::filesystem::path& config) {
    return std::make_unique<Engine>(Engine::load_inputs(DeploymentConfig::load(config)));
}

std::vector<std::string> fixpoint(std::string_view rules, std::string_view facts) {
    KnowledgeBase kb;
    kb.load_rules(rules);
    kb.load_facts(facts);
    std::vector<std::string> out;
    for (const Atom& a : forward_chain(kb).facts) out.push_back(to_string(a));
    return out;
}

std::string build(std::string_view rules, std::string_view facts, std::string_view goal) {
    KnowledgeBase kb;
    kb.load_rules(rules);
    kb.load_facts(facts);
    return graph_to_json(build_graph(forward_chain(kb).derivations, kb.facts(), parse_atom(goal))).dump();
}

std::vector<std::string> impacts(std::string_view ontology, const std::string& cve) {
    const OntologyStore store = load_ontology(ontology);
    const VulnerabilityRecord* rec = store.lookup(cve);
    if (!rec) throw py::key_error(cve);
    std::vector<std::string> out;
    for (const auto& i : post_conditions(*rec)) out.push_back(i.display());
    return out;
}

template <typename F>
py::tuple run_command(F&& f) {
    std::ostringstream out, err;
    int code;
    {
        py::gil_scoped_release release;
        code = f(out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

} // namespace

PYBIND11_MODULE(_core, m) {
    py::register_exception<Error>(m, "Error");
    py::register_exception<ParseError>(m, "ParseError", m.attr("Error"));
    py::register_exception<SchemaError>(m, "SchemaError", m.attr("Error"));
    py::register_exception<GoalNotDerivableError>(m, "GoalNotDerivableError", m.attr("Error"));

    m.attr("API_FORMAT_VERSION") = kApiFormatVersion;

    m.def("fixpoint", &fixpoint, py::arg("rules"), py::arg("facts"));
    m.def("build_graph_json", &build, py::arg("rules"), py::arg("facts"), py::arg("goal"));
    m.def("post_conditions", &impacts, py::arg("ontology"), py::arg("cve"));

    m.def(
        "generate",
        [](const std::filesystem::path& config, const std::filesystem::path& out_dir) {
            const DeploymentConfig c = DeploymentConfig::load(config);
            return run_command([&](std::ostream& o, std::ostream& e) { return cmd_generate(c, out_dir, o, e); });
        },
        py::arg("config"), py::arg("out_dir"));
    m.def(
        "replay",
        [](const std::filesystem::path& config, const std::filesystem::path& alerts,
           std::optional<std::filesystem::path> out_dir) {
            const DeploymentConfig c = DeploymentConfig::load(config);
            return run_command([&](std::ostream& o, std::ostream& e) { return cmd_replay(c, alerts, out_dir, o, e); });
        },
        py::arg("config"), py::arg("alerts"), py::arg("out_dir") = std::nullopt);

    py::class_<Engine>(m, "Engine")
        .def(py::init(&open_engine), py::arg("config"))
        .def("current_json", [](const Engine& e) { return version_export(*e.current()).dump(); })
        .def("history_json",
             [](const Engine& e) {
                 nlohmann::json out = nlohmann::json::array();
                 for (const auto& v : e.history()) out.push_back(version_summary(*v));
                 return out.dump();
             })
        .def(
            "submit_json",
            [](Engine& e, const std::string& alert) {
                py::gil_scoped_release release;
                return e.submit(alert).to_json().dump();
            },
            py::arg("alert"))
        .def(
            "what_if_json",
            [](const Engine& e, const std::string& alert) {
                py::gil_scoped_release release;
                return e.what_if(alert).to_json().dump();
            },
            py::arg("alert"));
}
