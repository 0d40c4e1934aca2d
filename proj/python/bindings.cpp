#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "loctime/chain.hpp"
#include "loctime/error.hpp"
#include "loctime/exact_law.hpp"
#include "loctime/harness.hpp"
#include "loctime/local_time.hpp"
#include "loctime/spectral.hpp"
#include "loctime/stats.hpp"

namespace py = pybind11;
using namespace loctime;

namespace {

py::dict to_dict(const AperiodicityReport& r) {
  py::dict d;
  d["is_aperiodic"] = r.is_aperiodic;
  d["min_gap"] = r.min_gap;
  d["offending_t"] = r.offending_t;
  d["interior_gap"] = r.interior_gap;
  d["scan_points"] = r.scan_points;
  return d;
}

py::dict to_dict(const MomentStatistics& st) {
  py::dict d;
  d["n"] = st.n;
  d["x"] = st.x;
  d["y"] = st.y;
  d["samples"] = st.samples;
  d["m6"] = st.m6;
  d["m6_stderr"] = st.m6_stderr;
  d["rhs"] = st.rhs;
  d["ratio"] = st.ratio;
  py::list tails;
  for (const auto& t : st.tails) {
    py::dict e;
    e["eps"] = t.eps;
    e["prob"] = t.prob;
    e["stderr"] = t.std_error;
    tails.append(e);
  }
  d["tails"] = tails;
  return d;
}

}  // namespace

PYBIND11_MODULE(_loctime, m) {
  m.doc() = "Local-time invariance toolkit for finite-state Markov shifts";

  py::register_exception<Error>(m, "LoctimeError", PyExc_RuntimeError);

  py::class_<MarkovShift>(m, "MarkovShift")
      .def_property_readonly("size", &MarkovShift::size)
      .def_property_readonly("states", &MarkovShift::states)
      .def_property_readonly("transition", &MarkovShift::transition)
      .def_property_readonly("stationary", &MarkovShift::stationary)
      .def_property_readonly("observable", &MarkovShift::observable)
      .def("to_json", &chain_to_json)
      .def("__repr__", [](const MarkovShift& s) {
        return "<MarkovShift with " + std::to_string(s.size()) + " states>";
      });

  m.def("build_chain",
        [](const Matrix& p, const std::vector<int>& phi, std::vector<std::string> states) {
          return build_chain(p, phi, std::move(states));
        },
        py::arg("transition"), py::arg("observable"), py::arg("states") = std::vector<std::string>{});
  m.def("load_chain", [](const std::string& text) { return load_chain_json(text); }, py::arg("text"));
  m.def("load_chain_file", &load_chain_file, py::arg("path"));
  m.def("stationary_distribution", &stationary_distribution, py::arg("transition"));

  auto models = m.def_submodule("models", "Reference chains");
  models.def("lazy_walk", &models::lazy_walk);
  models.def("plus_minus_walk", &models::plus_minus_walk);
  models.def("two_state_flip", &models::two_state_flip, py::arg("p"));
  models.def("circulant_walk", &models::circulant_walk);
  models.def("sticky_walk", &models::sticky_walk, py::arg("stay"), py::arg("leave"));

  m.def("sample_paths",
        [](const MarkovShift& s, std::size_t n, std::size_t count, std::uint64_t seed, unsigned threads) {
          auto batch = sample_paths(s, n, count, seed, threads);
          Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(count, n);
          std::copy(batch.increments.begin(), batch.increments.end(), out.data());
          return out;
        },
        py::arg("shift"), py::arg("n"), py::arg("count"), py::arg("seed"), py::arg("threads") = 1);

  m.def("transfer_matrix", &transfer_matrix, py::arg("shift"));
  m.def("twisted_operator", &twisted_operator, py::arg("shift"), py::arg("t"));
  m.def("green_kubo_variance", &green_kubo_variance, py::arg("shift"));
  m.def("curvature_variance", &curvature_variance, py::arg("shift"), py::arg("step") = 1e-3);
  m.def("asymptotic_variance", &asymptotic_variance, py::arg("shift"));
  m.def("spectral_radius", &spectral_radius, py::arg("shift"), py::arg("t"));
  m.def("eigen_branch",
        [](const MarkovShift& s, const std::vector<double>& grid) {
          const auto b = eigen_branch(s, grid);
          py::dict d;
          d["grid"] = b.grid;
          d["lambda"] = b.lambda;
          d["gap"] = b.gap;
          d["sigma2"] = b.sigma2;
          return d;
        },
        py::arg("shift"), py::arg("grid"));
  m.def("uniform_frequency_grid", &uniform_frequency_grid, py::arg("points"));
  m.def("check_aperiodicity",
        [](const MarkovShift& s, std::size_t scan_points, unsigned threads) {
          return to_dict(check_aperiodicity(s, scan_points, threads));
        },
        py::arg("shift"), py::arg("scan_points") = 1024, py::arg("threads") = 1);

  m.def("exact_law",
        [](const MarkovShift& s, std::size_t n) {
          const auto law = exact_law(s, n);
          py::dict d;
          d["n"] = law.n;
          d["support_min"] = law.support_min;
          d["support_max"] = law.support_max;
          d["marginals"] = law.marginals();
          return d;
        },
        py::arg("shift"), py::arg("n"));
  m.def("law_via_inversion",
        [](const MarkovShift& s, std::size_t n, long long x) { return law_via_inversion(s, n, x); },
        py::arg("shift"), py::arg("n"), py::arg("x"));
  m.def("local_limit_maxima",
        [](const MarkovShift& s, const std::vector<std::size_t>& ns) { return local_limit_maxima(s, ns); },
        py::arg("shift"), py::arg("n_list"));
  m.def("potential_kernel",
        [](const MarkovShift& s, std::size_t horizon, long long x, long long y) {
          return potential_kernel(s, horizon, x, y).partial_sums;
        },
        py::arg("shift"), py::arg("horizon"), py::arg("x"), py::arg("y"));
  m.def("extrapolated_variance",
        [](const MarkovShift& s, const std::vector<std::size_t>& ns) { return extrapolated_variance(s, ns); },
        py::arg("shift"), py::arg("doubling_ns"));

  py::class_<LocalTimeField>(m, "LocalTimeField")
      .def_readonly("n", &LocalTimeField::n)
      .def_readonly("min_level", &LocalTimeField::min_level)
      .def_readonly("counts", &LocalTimeField::counts)
      .def_readonly("final_position", &LocalTimeField::final_position)
      .def("count", &LocalTimeField::count, py::arg("level"))
      .def("value", &LocalTimeField::value, py::arg("x"))
      .def("total", &LocalTimeField::total);
  m.def("local_time_field", [](const std::vector<int>& inc) { return local_time_field(inc); },
        py::arg("increments"));
  m.def("occupation",
        [](const std::vector<int>& inc, double a, double b) {
          const auto r = occupation(inc, a, b);
          py::dict d;
          d["nu"] = r.nu;
          d["integral"] = r.integral;
          d["strips"] = py::make_tuple(r.strips.left, r.strips.right);
          d["within_bound"] = r.within_bound();
          return d;
        },
        py::arg("increments"), py::arg("a"), py::arg("b"));
  m.def("modulus",
        [](const LocalTimeField& f, double h, double delta) {
          const auto r = modulus(f, h, delta);
          return py::make_tuple(r.omega, r.omega_prime);
        },
        py::arg("field"), py::arg("h"), py::arg("delta"));
  m.def("moment_statistics",
        [](const MarkovShift& s, std::size_t n, long long x, long long y, std::size_t samples,
           std::uint64_t seed, std::vector<double> eps, unsigned threads) {
          return to_dict(moment_statistics(s, n, x, y, samples, seed, eps, threads));
        },
        py::arg("shift"), py::arg("n"), py::arg("x"), py::arg("y"), py::arg("samples"), py::arg("seed"),
        py::arg("eps_grid") = kDefaultEpsGrid, py::arg("threads") = 1);
  m.def("level_samples",
        [](const MarkovShift& s, std::size_t n, double level, std::size_t count, std::uint64_t seed,
           unsigned threads) { return level_samples(s, n, level, count, seed, threads); },
        py::arg("shift"), py::arg("n"), py::arg("level"),
        py::arg("count"), py::arg("seed"), py::arg("threads") = 1);

  m.def("ks_statistic",
        [](const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
          return ks_statistic(sorted, cdf);
        },
        py::arg("sorted_sample"), py::arg("cdf"));
  m.def("ks_two_sample",
        [](const std::vector<double>& a, const std::vector<double>& b) { return ks_two_sample(a, b); },
        py::arg("a"), py::arg("b"));
  m.def("levy_reference_cdf", [](double sigma2) { return levy_reference_cdf(sigma2); },
        py::arg("sigma2"));

  m.def("run_experiment",
        [](const std::string& config_path, std::optional<std::string> output_dir, unsigned threads) {
          auto config = load_config(config_path);
          if (output_dir) config.output_dir = *output_dir;
          const auto report = run_experiment(config, {.threads = threads});
          return report_to_json(report);
        },
        py::arg("config_path"), py::arg("output_dir") = py::none(), py::arg("threads") = 1,
        "Runs a campaign and returns the report as a JSON string.");
  m.attr("check_names") = kCheckNames;
  m.attr("__version__") = kToolVersion;
}
