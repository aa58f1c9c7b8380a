// Python bindings: spectral closed forms, cascade sampling, the wave
// recursion, stable subordination and the experiment harness.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "cascadelab/cascade.hpp"
#include "cascadelab/config.hpp"
#include "cascadelab/error.hpp"
#include "cascadelab/harness.hpp"
#include "cascadelab/levy.hpp"
#include "cascadelab/spectral.hpp"
#include "cascadelab/verify.hpp"
#include "cascadelab/wave.hpp"

namespace py = pybind11;
using namespace cascadelab;

namespace {

py::array_t<double> to_array(std::vector<double> v) {
  auto* heap = new std::vector<double>(std::move(v));
  py::capsule owner(heap, [](void* p) { delete static_cast<std::vector<double>*>(p); });
  return py::array_t<double>({heap->size()}, {sizeof(double)}, heap->data(), owner);
}

CascadeSpec make_spec(int n, std::uint64_t seed, std::uint32_t replica) {
  CascadeSpec s;
  s.level_n = n;
  s.seed = seed;
  s.replica = replica;
  return s;
}

py::object to_python(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_cascadelab, m) {
  m.doc() = "Mandelbrot cascades at critical and non-critical temperature";

  // Translators run newest first, so the subclass goes last.
  py::register_exception<Error>(m, "CascadeError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  const SpectralModel critical = SpectralModel::gaussian_critical();
  m.def("phi", [critical](double s) { return phi(critical, s); }, py::arg("s"));
  m.def("phi_tilde", [critical](double beta) { return phi_tilde(critical, beta); }, py::arg("beta"));
  m.def("tau", [critical](double s) { return tau(critical, s); }, py::arg("s"));
  m.def("tau_star", [critical](double gamma) { return tau_star(critical, gamma).value; }, py::arg("gamma"));
  m.def("q_beta", [critical](double beta) { return q_beta(critical, beta); }, py::arg("beta"));
  m.def("kpz_solve", [critical](double zeta0) { return kpz_solve(critical, zeta0); }, py::arg("zeta0"));
  m.def(
      "kpz_dual", [critical](double zeta0, double alpha) { return kpz_dual(critical, zeta0, alpha); },
      py::arg("zeta0"), py::arg("alpha"));
  m.def("c_alpha", &c_alpha, py::arg("alpha"), "Asymptotic front speed; pass math.inf for Heaviside data.");

  m.def(
      "leaf_weights",
      [](int n, std::uint64_t seed, std::uint32_t replica) {
        return to_array(LeafEnsemble(make_spec(n, seed, replica)).materialize());
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("replica") = 0, "Path sums X_σ of the 2^n leaves.");
  m.def(
      "measure",
      [](int n, double beta, std::uint64_t seed, std::uint32_t replica) {
        return to_array(build_measure(LeafEnsemble(make_spec(n, seed, replica)), beta).masses);
      },
      py::arg("n"), py::arg("beta") = 1.0, py::arg("seed") = 0, py::arg("replica") = 0,
      "Normalized cell masses of the depth-n measure.");
  m.def(
      "total_mass",
      [](int n, double beta, int replicas, std::uint64_t seed, int threads) {
        return to_array(sample_total_mass(make_spec(n, seed, 0), beta, replicas, threads));
      },
      py::arg("n"), py::arg("beta") = 1.0, py::arg("replicas") = 100, py::arg("seed") = 0, py::arg("threads") = 0);

  m.def(
      "front_tracking",
      [](double alpha, int iterations) {
        const FrontTrace t = run_front_tracking(alpha, iterations);
        py::dict out;
        out["m"] = to_array(t.m);
        out["width"] = to_array(t.width);
        if (t.fitted) {
          out["log_coefficient"] = t.fitted->log;
          out["log_ci"] = py::make_tuple(t.fitted->log_ci_low, t.fitted->log_ci_high);
          out["speed"] = t.fitted->linear;
        }
        return out;
      },
      py::arg("alpha"), py::arg("iterations") = 60);

  m.def(
      "stable",
      [](double alpha, double gap, int count, std::uint64_t seed) {
        PhiloxEngine rng(StreamKey{seed, 0, Stream::synthetic});
        std::vector<double> v(static_cast<std::size_t>(count));
        for (double& x : v) x = sample_stable_increment(alpha, gap, rng);
        return to_array(std::move(v));
      },
      py::arg("alpha"), py::arg("gap") = 1.0, py::arg("count") = 1000, py::arg("seed") = 0,
      "Increments of the one-sided stable subordinator over a time gap.");
  m.def(
      "subordinate",
      [](int n, double beta, double alpha, std::uint64_t seed, std::uint32_t replica) {
        const AtomicMeasure am = subordinate(build_measure(LeafEnsemble(make_spec(n, seed, replica)), beta), alpha,
                                             seed, replica);
        py::list atoms;
        for (const Atom& a : am.atoms) atoms.append(py::make_tuple(a.location, a.mass));
        py::dict out;
        out["cells"] = to_array(am.cells.masses);
        out["atoms"] = atoms;
        out["total"] = am.total();
        return out;
      },
      py::arg("n"), py::arg("beta") = 1.0, py::arg("alpha") = 0.5, py::arg("seed") = 0, py::arg("replica") = 0);

  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::map<std::string, std::string>& settings, bool write) {
        const auto e = parse_experiment(experiment);
        if (!e) throw ConfigError(0, "experiment", "unknown experiment '" + experiment + "'");
        const ExperimentConfig cfg = resolve_config(*e, {}, settings);
        ExperimentReport rep;
        {
          py::gil_scoped_release release;
          rep = write ? run_experiment(cfg) : compute_experiment(cfg);
        }
        return to_python(rep.to_json());
      },
      py::arg("experiment"), py::arg("settings") = std::map<std::string, std::string>{}, py::arg("write") = false,
      "Runs one experiment; settings are config keys with string values. Returns the report as a dict.");

  m.def(
      "verify",
      [](const std::string& profile, const std::vector<std::string>& only, std::uint64_t seed) {
        VerifyOptions opt;
        opt.only = only;
        opt.seed = seed;
        VerifySummary s;
        {
          py::gil_scoped_release release;
          s = verify_all(profile == "full" ? VerifyProfile::full : VerifyProfile::quick, opt);
        }
        py::list out;
        for (const auto& r : s.results) out.append(py::make_tuple(r.id, r.passed, r.detail));
        return out;
      },
      py::arg("profile") = "quick", py::arg("only") = std::vector<std::string>{}, py::arg("seed") = 20130707);
}
