// SPDX-License-Identifier: Apache-2.0
//
// obdoa: one-bit off-grid DOA estimation for sparse linear arrays
// Copyright (C) 2026 The obdoa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "obdoa/binary.hpp"
#include "obdoa/dataset_io.hpp"
#include "obdoa/eval.hpp"
#include "obdoa/normal.hpp"
#include "obdoa/ogbrim.hpp"
#include "obdoa/parity.hpp"
#include "obdoa/unrolled.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace obdoa;

namespace {

SourceScene make_scene(std::vector<double> doas, std::vector<cplx> coeffs, double sigma) {
    SourceScene s;
    s.doas_deg = std::move(doas);
    s.coeffs = std::move(coeffs);
    s.sigma = sigma;
    return s;
}

py::dict sample_dict(const LabeledSample& s) {
    py::dict d;
    d["y"] = s.y.y();
    d["s_star"] = s.s_star;
    d["beta_star"] = s.beta_star;
    d["snr_db"] = s.snr_db;
    if (s.y.scene()) d["doas_deg"] = s.y.scene()->doas_deg;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "One-bit off-grid DOA estimation: simulation, OGBRIM solver, unrolled network inference.";

    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

    py::class_<ArrayGeometry>(m, "ArrayGeometry")
        .def(py::init([](const std::string& spec) { return make_geometry(spec); }), py::arg("spec"))
        .def(py::init([](std::vector<double> p) { return make_geometry(std::move(p)); }), py::arg("positions"))
        .def_property_readonly("positions", &ArrayGeometry::positions)
        .def("__len__", [](const ArrayGeometry& g) { return g.size(); })
        .def("describe", &ArrayGeometry::describe)
        .def("__repr__", [](const ArrayGeometry& g) { return "ArrayGeometry('" + g.describe() + "')"; });

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<double, double, double>(), py::arg("fov_min_deg") = -60.0, py::arg("fov_max_deg") = 60.0,
             py::arg("step_deg") = 2.0)
        .def_static("parse", [](const std::string& s) { return GridSpec::parse(s); })
        .def_property_readonly("step_deg", &GridSpec::step_deg)
        .def("points", &GridSpec::points)
        .def("__len__", [](const GridSpec& g) { return g.size(); })
        .def("nearest_index", &GridSpec::nearest_index)
        .def("describe", &GridSpec::describe)
        .def("__repr__", [](const GridSpec& g) { return "GridSpec('" + g.describe() + "')"; });

    py::class_<DictionaryPair>(m, "Dictionary")
        .def(py::init(&build_dictionary), py::arg("geometry"), py::arg("grid") = GridSpec())
        .def_readonly("A", &DictionaryPair::A)
        .def_readonly("B", &DictionaryPair::B)
        .def_readonly("grid", &DictionaryPair::grid)
        .def_readonly("geometry", &DictionaryPair::geometry)
        .def("effective", &effective_dictionary, py::arg("beta_deg"));

    m.def("steering_vector", &steering_vector, py::arg("geometry"), py::arg("theta_deg"));
    m.def("steering_derivative", &steering_derivative, py::arg("geometry"), py::arg("theta_deg"));

    m.def("csgn", &csgn, py::arg("z"));
    m.def("snr_to_sigma", &snr_to_sigma, py::arg("snr_db"));
    m.def(
        "simulate_snapshot",
        [](const ArrayGeometry& g, std::vector<double> doas, std::vector<cplx> coeffs, double snr_db,
           std::uint64_t seed) {
            return simulate_snapshot(g, make_scene(std::move(doas), std::move(coeffs), snr_to_sigma(snr_db)), seed).y();
        },
        py::arg("geometry"), py::arg("doas_deg"), py::arg("coeffs"), py::arg("snr_db"), py::arg("seed"),
        "One-bit snapshot as a complex array with entries in {+-1 +-1j}.");

    m.def("normal_cdf", &normal_cdf);
    m.def("pdf_over_cdf", &pdf_over_cdf);
    m.def("i_prime", &i_prime);

    py::enum_<BetaSupport>(m, "BetaSupport")
        .value("threshold", BetaSupport::threshold)
        .value("peaks", BetaSupport::peaks);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("lambda_", &SolverConfig::lambda)
        .def_readwrite("alpha", &SolverConfig::alpha)
        .def_readwrite("eta", &SolverConfig::eta)
        .def_readwrite("max_iters", &SolverConfig::max_iters)
        .def_readwrite("tol", &SolverConfig::tol)
        .def_readwrite("beta_update_start", &SolverConfig::beta_update_start)
        .def_readwrite("support_threshold", &SolverConfig::support_threshold)
        .def_readwrite("beta_support", &SolverConfig::beta_support)
        .def_readwrite("grid", &SolverConfig::grid)
        .def("validate", &SolverConfig::validate)
        .def("to_dict", &SolverConfig::to_key_values)
        .def_static("from_dict", &SolverConfig::from_key_values);

    py::class_<SpectrumEstimate>(m, "Spectrum")
        .def_readonly("grid_deg", &SpectrumEstimate::grid_deg)
        .def_readonly("magnitudes", &SpectrumEstimate::magnitudes)
        .def_readonly("beta_deg", &SpectrumEstimate::beta_deg)
        .def("doas", &extract_doas, py::arg("K"));

    py::class_<SolveResult>(m, "SolveResult")
        .def_property_readonly("spectrum", [](const SolveResult& r) { return r.estimate; })
        .def_property_readonly("x_hat", [](const SolveResult& r) { return r.state.x_hat; })
        .def_property_readonly("iterations", [](const SolveResult& r) { return r.state.iter; })
        .def_property_readonly("cost_history", [](const SolveResult& r) { return r.state.cost_history; });

    m.def(
        "solve",
        [](const CVector& y, const DictionaryPair& d, const SolverConfig& cfg) {
            py::gil_scoped_release release;
            return solve(OneBitSnapshot(y), d, cfg);
        },
        py::arg("y"), py::arg("dictionary"), py::arg("config") = SolverConfig());

    py::class_<NetArchitecture>(m, "NetArchitecture")
        .def_static("defaults", &NetArchitecture::defaults, py::arg("grid") = GridSpec())
        .def_readwrite("K1", &NetArchitecture::K1)
        .def_readwrite("K2", &NetArchitecture::K2)
        .def_readwrite("fc_widths", &NetArchitecture::fc_widths)
        .def_readonly("grid", &NetArchitecture::grid)
        .def("to_json", [](const NetArchitecture& a) { return architecture_json(a); });

    py::class_<WeightBundle>(m, "WeightBundle")
        .def_property_readonly("architecture", &WeightBundle::architecture)
        .def("tensor_names", [](const WeightBundle& w) {
            std::vector<std::string> names;
            for (const auto& [name, t] : w.tensors()) names.push_back(name);
            return names;
        });

    m.def("zero_weights", &zero_weights, py::arg("architecture"));
    m.def("random_weights", &random_weights, py::arg("architecture"), py::arg("seed"), py::arg("scale") = 0.5);
    m.def("load_weights", &load_weights, py::arg("path"));
    m.def("save_weights", &save_weights, py::arg("weights"), py::arg("path"), py::arg("write_sidecar") = true);
    m.def(
        "forward",
        [](const CVector& y, const DictionaryPair& d, const WeightBundle& w) {
            py::gil_scoped_release release;
            return forward(OneBitSnapshot(y), d, w);
        },
        py::arg("y"), py::arg("dictionary"), py::arg("weights"));

    py::class_<DatasetConfig>(m, "DatasetConfig")
        .def(py::init<>())
        .def_readwrite("geometry", &DatasetConfig::geometry)
        .def_readwrite("grid", &DatasetConfig::grid)
        .def_readwrite("sources", &DatasetConfig::sources)
        .def_readwrite("snr_set_db", &DatasetConfig::snr_set_db)
        .def_readwrite("count", &DatasetConfig::count)
        .def_readwrite("split", &DatasetConfig::split);

    m.def(
        "generate_dataset",
        [](const DatasetConfig& cfg, std::uint64_t seed, const std::filesystem::path& out, unsigned jobs) {
            DatasetSummary s;
            {
                py::gil_scoped_release release;
                s = generate_dataset(cfg, seed, out, jobs);
            }
            return py::make_tuple(s.train_path, s.val_path);
        },
        py::arg("config"), py::arg("seed"), py::arg("out_dir"), py::arg("jobs") = 1);

    py::class_<DatasetReader>(m, "DatasetReader")
        .def(py::init<const std::filesystem::path&>(), py::arg("path"))
        .def("__len__", &DatasetReader::size)
        .def_property_readonly("geometry", [](const DatasetReader& r) { return r.header().geometry(); })
        .def_property_readonly("grid", [](const DatasetReader& r) { return r.header().grid; })
        .def("__getitem__", [](DatasetReader& r, std::uint64_t i) { return sample_dict(r.read(i)); });

    m.def(
        "check_parity",
        [](const std::filesystem::path& reference, const std::filesystem::path& dataset, const WeightBundle& w) {
            DatasetReader reader(dataset);
            const ParityReport r = check_parity(read_parity_csv(reference), reader, w);
            return r.max_abs();
        },
        py::arg("reference_csv"), py::arg("dataset"), py::arg("weights"),
        "Largest absolute deviation between forward() and the reference rows.");

    m.def(
        "benchmark",
        [](int trials, std::vector<double> snr_db, std::uint64_t seed, const SolverConfig& solver, unsigned jobs) {
            EvalConfig cfg;
            cfg.trials = trials;
            cfg.snr_grid_db = std::move(snr_db);
            cfg.seed = seed;
            cfg.solver = solver;
            cfg.jobs = jobs;
            EvalReport report;
            {
                py::gil_scoped_release release;
                report = run_monte_carlo(cfg);
            }
            py::list rows;
            for (const auto& r : report.rows) {
                py::dict d;
                d["snr_db"] = r.snr_db;
                d["detection_rate"] = r.detection_rate;
                d["rmse_deg"] = r.rmse_deg ? py::cast(*r.rmse_deg) : py::none();
                rows.append(d);
            }
            return rows;
        },
        py::arg("trials"), py::arg("snr_db"), py::arg("seed"), py::arg("solver") = SolverConfig(),
        py::arg("jobs") = 1, "OGBRIM detection rate and RMSE on the two-source sla18 scene.");
}
