#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "reachplan/demos.hpp"
#include "reachplan/error.hpp"
#include "reachplan/geometry.hpp"
#include "reachplan/io.hpp"
#include "reachplan/planner.hpp"
#include "reachplan/reach.hpp"
#include "reachplan/setlearn.hpp"
#include "reachplan/sim.hpp"
#include "reachplan/version.hpp"

namespace py = pybind11;
using namespace reachplan;
using geometry::Mat;
using geometry::Point2;
using geometry::Vec;
using geometry::VPolytope;

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Polytopes cross the boundary as (n, d) vertex arrays.
VPolytope from_rows(const RowMat& M) {
  VPolytope V;
  for (Eigen::Index i = 0; i < M.rows(); ++i) V.vertices.emplace_back(M.row(i).transpose());
  return V;
}

RowMat to_rows(const VPolytope& V) {
  RowMat M(static_cast<Eigen::Index>(V.size()), V.size() ? V.dim() : 0);
  for (std::size_t i = 0; i < V.size(); ++i) M.row(static_cast<Eigen::Index>(i)) = V.vertices[i].transpose();
  return M;
}

std::vector<Vec> samples_from(const RowMat& M) {
  std::vector<Vec> out;
  for (Eigen::Index i = 0; i < M.rows(); ++i) out.emplace_back(M.row(i).transpose());
  return out;
}

py::object parse_json(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

io::json config_json(const std::string& text) {
  try {
    return text.empty() ? io::json::object() : io::json::parse(text);
  } catch (const io::json::exception& e) {
    throw Error(ErrorCode::Config, e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Learned-occupancy motion planning core";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<Error>(m, "ReachplanError", PyExc_ValueError);

  m.def("hull_2d", [](const RowMat& pts) { return to_rows(geometry::hull_2d(samples_from(pts))); }, py::arg("points"),
        "Counter-clockwise convex hull of an (n, 2) point array.");
  m.def("minkowski_sum",
        [](const RowMat& a, const RowMat& b) { return to_rows(geometry::minkowski_sum(from_rows(a), from_rows(b))); },
        py::arg("a"), py::arg("b"));
  m.def("project", [](const RowMat& v, const std::vector<int>& dims) { return to_rows(geometry::project(from_rows(v), dims)); },
        py::arg("vertices"), py::arg("dims"));
  m.def("distance_2d", [](const RowMat& a, const RowMat& b) { return geometry::distance_2d(from_rows(a), from_rows(b)); },
        py::arg("a"), py::arg("b"));
  m.def("area_2d", [](const RowMat& v) { return geometry::area_2d(from_rows(v)); }, py::arg("vertices"));

  py::class_<setlearn::AdmissibleSet>(m, "AdmissibleSet")
      .def_static("box", [](double hx, double hy) { return setlearn::AdmissibleSet::box(Vec(Point2(hx, hy))); },
                  py::arg("hx"), py::arg("hy"))
      .def_static("regular_polygon", &setlearn::AdmissibleSet::regular_polygon, py::arg("sides"), py::arg("inradius"),
                  py::arg("rotation") = 0.0)
      .def_static("from_matrix", [](const Mat& H) { return setlearn::AdmissibleSet::from_matrix(H); }, py::arg("H"))
      .def_readonly("H", &setlearn::AdmissibleSet::H)
      .def("contains", [](const setlearn::AdmissibleSet& U, const Vec& u) { return U.contains(u); });

  py::class_<setlearn::LearnedSet>(m, "LearnedSet")
      .def_readonly("H", &setlearn::LearnedSet::H)
      .def_readonly("theta", &setlearn::LearnedSet::theta)
      .def_readonly("y", &setlearn::LearnedSet::y)
      .def_readonly("rho", &setlearn::LearnedSet::rho)
      .def_readonly("objective", &setlearn::LearnedSet::objective)
      .def("vertices", [](const setlearn::LearnedSet& s) { return to_rows(setlearn::to_vertices(s)); })
      .def("area", [](const setlearn::LearnedSet& s) { return setlearn::area(s); });

  m.def("batch_learn",
        [](const setlearn::AdmissibleSet& U, const RowMat& samples) {
          const auto us = samples_from(samples);
          return setlearn::batch_learn(U, us);
        },
        py::arg("admissible"), py::arg("samples"));
  m.def("recursive_update", &setlearn::recursive_update, py::arg("previous"), py::arg("sample"));
  m.def("init_seed",
        [](const setlearn::AdmissibleSet& U, double fraction) {
          const auto seeds = setlearn::default_seeds(U, fraction);
          return setlearn::init_seed(U, seeds);
        },
        py::arg("admissible"), py::arg("fraction") = 0.01);

  m.def("double_integrator_occupancy",
        [](const Vec& x0, const RowMat& inputs, double T, int N) {
          const auto tube = reach::forward_occupancy(reach::LtvModel::double_integrator(T, N), x0, from_rows(inputs), N,
                                                     {.state_sets = false});
          std::vector<RowMat> out;
          for (const auto& O : tube.O) out.push_back(to_rows(O));
          return out;
        },
        py::arg("x0"), py::arg("inputs"), py::arg("T") = 0.25, py::arg("N") = reach::kDefaultHorizon,
        "Position occupancies of a double integrator (px, vx, py, vy) driven by a polygonal input set.");

  m.def("compute_d_min", &planner::compute_d_min, py::arg("ego_length"), py::arg("ego_width"), py::arg("obs_length"),
        py::arg("obs_width"));

  m.def("_run", [](const std::string& config, const std::string& mode) {
    auto s = io::scenario_from_json(config_json(config));
    if (!mode.empty()) s.planner.mode = planner::mode_from_string(mode);
    sim::Trace tr;
    {
      py::gil_scoped_release release;
      tr = sim::run_closed_loop(s);
    }
    const auto met = sim::evaluate(tr, s);
    io::json out = {{"metrics", io::to_json(met)}, {"trace", io::trace_to_json(tr)}};
    return parse_json(out.dump());
  });

  m.def("_monte_carlo", [](const std::string& config, int n, const std::vector<std::string>& modes, int threads) {
    const auto s = io::scenario_from_json(config_json(config));
    std::vector<planner::Mode> ms;
    for (const auto& name : modes) ms.push_back(planner::mode_from_string(name));
    sim::MonteCarloResult r;
    {
      py::gil_scoped_release release;
      r = sim::monte_carlo(s, n, ms, threads);
    }
    io::json out = {{"summary", io::json::array()}, {"runs", io::json::array()}};
    for (const auto& sm : r.summary) out["summary"].push_back(io::to_json(sm));
    for (const auto& run : r.runs) {
      io::json j = io::to_json(run.metrics);
      j["run"] = run.index;
      j["seed"] = run.seed;
      j["mode"] = planner::to_string(run.mode);
      out["runs"].push_back(j);
    }
    return parse_json(out.dump());
  });

  m.def("_learn_demo", [](const std::string& config) {
    const auto r = demos::learn_demo(io::learn_demo_from_json(config_json(config)));
    std::ostringstream os;
    io::write_learn_csv(os, r);
    return os.str();
  });
}
