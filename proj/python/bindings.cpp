#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "relaydetect/detector.hpp"
#include "relaydetect/errors.hpp"
#include "relaydetect/figures.hpp"
#include "relaydetect/harness.hpp"
#include "relaydetect/relay.hpp"
#include "relaydetect/stats.hpp"

namespace py = pybind11;
using namespace relaydetect;

namespace {

RelayStrategy strategy_from(const py::object& spec, const ChannelParams& params) {
  if (py::isinstance<py::str>(spec)) {
    return make_strategy(parse_strategy(spec.cast<std::string>()), params);
  }
  if (PyCallable_Check(spec.ptr())) {
    auto f = spec.cast<std::function<double(double)>>();
    return DeterministicMap{std::move(f)};
  }
  throw std::invalid_argument("strategy must be a name or a callable u -> v");
}

Eigen::MatrixXd dense(const NestingMatrix& w) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) out(i, w.parent(i)) = 1.0;
  return out;
}

ConditionalKernel named_kernel(const std::string& name, const ChannelParams& p, double width) {
  if (name == "marginal") return marginal_kernel(p);
  if (name == "gaussian") return gaussian_kernel(width);
  throw std::invalid_argument("unknown kernel '" + name + "' (expected marginal or gaussian)");
}

}  // namespace

PYBIND11_MODULE(_relaydetect, m) {
  m.doc() = "Byzantine relay detection with a secured direct channel";
  m.attr("__version__") = std::string(version());

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init([](double h1, double h2, double h3) {
             ChannelParams p{h1, h2, h3};
             p.validate();
             return p;
           }),
           py::arg("h1") = 1.0, py::arg("h2") = 1.0, py::arg("h3") = 1.0)
      .def_readwrite("h1", &ChannelParams::h1)
      .def_readwrite("h2", &ChannelParams::h2)
      .def_readwrite("h3", &ChannelParams::h3)
      .def("__eq__", [](const ChannelParams& a, const ChannelParams& b) { return a == b; })
      .def("__repr__", [](const ChannelParams& p) {
        return "ChannelParams(h1=" + py::repr(py::float_(p.h1)).cast<std::string>() +
               ", h2=" + py::repr(py::float_(p.h2)).cast<std::string>() +
               ", h3=" + py::repr(py::float_(p.h3)).cast<std::string>() + ")";
      });

  // channel
  m.def("pdf_u_given_s", [](double u, int s, const ChannelParams& p) {
    if (s != 1 && s != -1) throw std::invalid_argument("symbol must be +1 or -1");
    return pdf_u_given_s(u, static_cast<Symbol>(s), p);
  });
  m.def("posterior_s_given_x", [](double x, const ChannelParams& p) {
    const auto post = posterior_s_given_x(x, p);
    return std::pair{post.plus, post.minus};
  }, "Returns (P(+1|x), P(-1|x)).");
  m.def("pdf_u_given_x", &pdf_u_given_x);
  m.def("pdf_u", &pdf_u);
  m.def("cdf_y_given_v", &cdf_y_given_v);
  m.def("sample_transmission", [](std::size_t n, const ChannelParams& p, std::uint64_t seed) {
    RandomStream rng(seed);
    const auto rec = sample_transmission(n, p, rng);
    py::dict out;
    out["s"] = rec.s;
    out["u"] = rec.u;
    out["x"] = rec.x;
    return out;
  }, py::arg("n"), py::arg("params"), py::arg("seed"));
  m.def("sample_y", [](const std::vector<double>& v, const ChannelParams& p, std::uint64_t seed) {
    RandomStream rng(seed);
    return sample_y(v, p, rng);
  }, py::arg("v"), py::arg("params"), py::arg("seed"));

  // quantizer
  py::class_<Grid>(m, "Grid")
      .def(py::init<double, double, std::size_t>(), py::arg("alpha"), py::arg("beta"),
           py::arg("bin_count"))
      .def_property_readonly("alpha", &Grid::alpha)
      .def_property_readonly("beta", &Grid::beta)
      .def_property_readonly("bin_count", &Grid::bin_count)
      .def_property_readonly("step", &Grid::step)
      .def_property_readonly("representatives", &Grid::representatives)
      .def_property_readonly("edges", [](const Grid& g) {
        return std::vector<double>(g.edges().begin(), g.edges().end());
      })
      .def("bin", [](const Grid& g, std::size_t i) {
        const auto b = g.bin(i);
        return std::pair{b.lower, b.upper};
      })
      .def("quantize", py::overload_cast<double>(&Grid::quantize, py::const_))
      .def("quantize_all", [](const Grid& g, const std::vector<double>& v) { return g.quantize(v); })
      .def("refine", &Grid::refine)
      .def("__eq__", [](const Grid& a, const Grid& b) { return a == b; });
  py::class_<NestedGridPair>(m, "NestedGridPair")
      .def_readonly("fine", &NestedGridPair::fine)
      .def_readonly("coarse", &NestedGridPair::coarse);
  m.def("build_nested_pair", &build_nested_pair, py::arg("range"), py::arg("coarse_bins"),
        py::arg("refinement"));
  m.def("is_nested", &is_nested);
  m.def("nesting_matrix", [](const NestedGridPair& p) { return dense(nesting_matrix(p)); });

  // relay
  m.def("apply_strategy", [](const std::vector<double>& u, const py::object& strategy,
                             const ChannelParams& p, std::uint64_t seed) {
    RandomStream rng(seed);
    return apply_strategy(u, strategy_from(strategy, p), rng);
  }, py::arg("u"), py::arg("strategy"), py::arg("params") = ChannelParams{}, py::arg("seed") = 0);
  m.def("attack_magnitude", [](const std::vector<double>& u, const std::vector<double>& v,
                               const NestedGridPair& pair, bool all_rows) {
    return attack_magnitude(u, v, pair,
                            all_rows ? MagnitudeMode::all_rows : MagnitudeMode::observed_rows)
        .value;
  }, py::arg("u"), py::arg("v"), py::arg("pair"), py::arg("all_rows") = false);

  // stats
  m.def("empirical_transition", [](const std::vector<std::size_t>& u,
                                   const std::vector<std::size_t>& v, std::size_t rows,
                                   std::size_t cols) {
    return empirical_transition(u, v, rows, cols).entries;
  });
  m.def("empirical_cond_cdf", [](const std::vector<double>& y, const std::vector<std::size_t>& x,
                                 const std::vector<double>& t, std::size_t bins) {
    return empirical_cond_cdf(y, x, t, bins).values;
  });
  m.def("p_u_bin_given_x_bin", &p_u_bin_given_x_bin);

  // detector
  m.def("reference_table", [](const ChannelParams& p, const Grid& x, const std::vector<double>& t) {
    return reference_table(p, x, t).values;
  });
  m.def("default_t_points", &default_t_points);
  m.def("detection_statistic", [](const std::vector<double>& x, const std::vector<double>& y,
                                  const Grid& x_grid, const Grid& y_grid, const ChannelParams& p) {
    const auto t = default_t_points(y_grid);
    const auto cdf = empirical_cond_cdf(y, x_grid.quantize(x), t, x_grid.bin_count());
    return decision_statistic(cdf, reference_table(p, x_grid, t));
  }, py::arg("x"), py::arg("y"), py::arg("x_grid"), py::arg("y_grid"), py::arg("params"));
  m.def("empirical_quantile_threshold", [](const std::vector<double>& v, double q) {
    return empirical_quantile_threshold(v, q);
  });
  m.def("check_manipulable", [](const ChannelParams& p, const std::string& kernel,
                                const std::vector<double>& x, const std::vector<double>& y,
                                double tol, double width) {
    const auto r = check_manipulable(p, named_kernel(kernel, p, width), x, y, tol);
    return std::pair{r.max_gap, r.manipulable_at_tol};
  }, py::arg("params"), py::arg("kernel") = "marginal",
        py::arg("x_points") = std::vector<double>{-2, -1, 0, 1, 2},
        py::arg("y_points") = std::vector<double>{-2, -1, 0, 1, 2}, py::arg("tol") = 1e-6,
        py::arg("width") = 1e-3, "Returns (max_gap, reproduces_honest_law).");
  py::class_<ManipulationObjective>(m, "ManipulationObjective")
      .def(py::init<const ChannelParams&, const NestedGridPair&, const Grid&, const Grid&>(),
           py::arg("params"), py::arg("uv_pair"), py::arg("x_grid"), py::arg("y_grid"))
      .def("__call__", &ManipulationObjective::operator())
      .def("nesting_point", &ManipulationObjective::nesting_point)
      .def_property_readonly("shape", [](const ManipulationObjective& o) {
        return py::make_tuple(o.u_bins(), o.v_bins(), o.x_bins());
      });

  // harness
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static("parse", &parse_config)
      .def_static("load", &load_config)
      .def("format", &format_config)
      .def_readwrite("params", &ExperimentConfig::params)
      .def_readwrite("n", &ExperimentConfig::n)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("quantile", &ExperimentConfig::quantile)
      .def_readwrite("out", &ExperimentConfig::out)
      .def_property("strategy",
                    [](const ExperimentConfig& c) { return std::string(to_string(c.strategy)); },
                    [](ExperimentConfig& c, const std::string& s) { c.strategy = parse_strategy(s); })
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; });
  m.def("figure_config", [](int figure, std::size_t run, std::uint64_t seed) {
    const auto preset = figure_preset(figure);
    return figure_config(preset, preset.runs.at(run), seed);
  }, py::arg("figure"), py::arg("run"), py::arg("seed") = 1);
  m.def("run_trial", &run_trial);
  m.def("run_experiment", [](const ExperimentConfig& c, std::size_t jobs) {
    ExperimentReport r;
    {
      py::gil_scoped_release release;
      r = run_experiment(c, jobs);
    }
    py::dict out;
    out["honest"] = r.honest;
    out["attack"] = r.attack;
    out["threshold"] = r.policy.threshold;
    out["ks"] = r.ks;
    return out;
  }, py::arg("config"), py::arg("jobs") = 1);
  m.def("ks_distance", [](const std::vector<double>& a, const std::vector<double>& b) {
    return ks_distance(a, b);
  });
}
