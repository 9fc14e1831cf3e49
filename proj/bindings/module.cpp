#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "seedgen/pdf.hpp"
#include "seedgen/pipeline.hpp"
#include "seedgen/trace.hpp"

namespace py = pybind11;
using namespace seedgen;

PYBIND11_MODULE(_seedgen, m) {
    m.doc() = "seed corpus generation core";

    m.def("run_toy_target", [](py::bytes data) {
        return serialize_trace(run_toy_target(std::string(data)));
    }, py::arg("data"), "Run the instrumented toy parser, return the trace text.");

    m.def("pct_delta", &pct_delta, py::arg("original"), py::arg("delta"));

    m.def("fnv1a64", [](py::bytes data) { return fnv1a64(std::string(data)); },
          py::arg("data"));

    m.def("extract_objects", [](py::bytes data) {
        auto r = extract_objects(std::string(data));
        py::list objects;
        for (const auto& o : r.objects)
            objects.append(py::make_tuple(o.obj_number, o.generation, o.body));
        return py::make_tuple(objects, r.warnings);
    }, py::arg("data"), "Returns ([(number, generation, body), ...], warnings).");

    m.def("assemble_pdf", [](const std::vector<std::string>& bodies, std::size_t root_index) {
        return py::bytes(assemble_pdf(bodies, root_index));
    }, py::arg("bodies"), py::arg("root_index") = 0);

    m.def("is_well_formed", [](py::bytes data) {
        auto r = is_well_formed(std::string(data));
        return py::make_tuple(r.ok, r.diagnostics);
    }, py::arg("data"), "Returns (ok, diagnostic lines).");

    m.def("run_pipeline", [](const std::string& config_text) {
        auto result = cmd_pipeline(parse_config(config_text));
        py::dict out;
        out["corpus_paths"] = result.original_corpus.size();
        out["generated_paths"] = result.generated_paths;
        out["well_formed_seeds"] = result.well_formed_seeds;
        out["manifest_path"] = result.manifest_path;
        return out;
    }, py::arg("config_text"), "Run the full pipeline from a config string.");

    m.def("evaluate", [](const std::string& original_dir,
                         const std::vector<std::pair<std::string, std::string>>& new_dirs,
                         const std::string& trace_dir) {
        PipelineConfig cfg;
        cfg.trace_dir = trace_dir;
        return render_report(cmd_eval(cfg, original_dir, new_dirs));
    }, py::arg("original_dir"), py::arg("new_dirs"), py::arg("trace_dir") = std::string(),
       "Coverage report comparing seed directories, as rendered text.");
}
