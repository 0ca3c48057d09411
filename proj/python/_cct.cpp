#include "cct/coeffs.hpp"
#include "cct/config.hpp"
#include "cct/continuum.hpp"
#include "cct/errors.hpp"
#include "cct/escape.hpp"
#include "cct/finite.hpp"
#include "cct/run.hpp"
#include "cct/sim.hpp"
#include "cct/transport.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace cct;

namespace {

py::dict summary_dict(const Summary& s) {
  py::dict d;
  for (const auto& [k, v] : s) d[py::str(k)] = v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_cct, m) {
  m.doc() = "Collective destination choice under congestion";

  py::register_exception<Error>(m, "CctError", PyExc_RuntimeError);

  py::class_<UniformBox>(m, "UniformBox")
      .def(py::init<Vector, Vector>(), py::arg("lower"), py::arg("upper"))
      .def_readwrite("lower", &UniformBox::lower)
      .def_readwrite("upper", &UniformBox::upper);
  py::class_<Empirical>(m, "Empirical")
      .def(py::init<Matrix>(), py::arg("points"))
      .def_readwrite("points", &Empirical::points);

  py::class_<ProblemSpec>(m, "ProblemSpec")
      .def(py::init<>())
      .def_readwrite("n", &ProblemSpec::n)
      .def_readwrite("m", &ProblemSpec::m)
      .def_readwrite("A", &ProblemSpec::A)
      .def_readwrite("B", &ProblemSpec::B)
      .def_readwrite("R_x", &ProblemSpec::R_x)
      .def_readwrite("R_d", &ProblemSpec::R_d)
      .def_readwrite("R_u", &ProblemSpec::R_u)
      .def_readwrite("M", &ProblemSpec::M)
      .def_readwrite("destinations", &ProblemSpec::destinations)
      .def_readwrite("T", &ProblemSpec::T)
      .def_readwrite("dist", &ProblemSpec::dist)
      .def_property_readonly("D", &ProblemSpec::D);

  m.def("validate_spec", [](const ProblemSpec& s) { return validate_spec(s).violations; });
  m.def("parse_config_text", [](const std::string& text) { return parse_config_text(text).spec; },
        "Problem instance from a JSON configuration document.");
  m.def("load_spec", [](const std::filesystem::path& p) { return parse_config(p).spec; });
  m.def("sample_initial_states", &sample_initial_states, py::arg("dist"), py::arg("N"), py::arg("seed"));

  py::class_<EscapeReport>(m, "EscapeReport")
      .def_readonly("escape_time", &EscapeReport::escape_time)
      .def_readonly("horizon_ok", &EscapeReport::horizon_ok)
      .def_readonly("margin", &EscapeReport::margin)
      .def_readonly("method", &EscapeReport::method)
      .def_readonly("equilibrium", &EscapeReport::equilibrium)
      .def_readonly("touch_flagged", &EscapeReport::touch_flagged);
  m.def(
      "escape_time",
      [](const ProblemSpec& s, bool force_integration) {
        EscapeOptions o;
        o.force_integration = force_integration;
        return escape_time(s, o);
      },
      py::arg("spec"), py::arg("force_integration") = false);
  m.def("riccati_equilibria", &riccati_equilibria);

  py::class_<CoeffSet>(m, "CoeffSet")
      .def_readonly("T", &CoeffSet::T)
      .def_readonly("n", &CoeffSet::n)
      .def_readonly("D", &CoeffSet::D)
      .def_readonly("W_int", &CoeffSet::W_int)
      .def_readonly("H", &CoeffSet::H)
      .def_readonly("mean0", &CoeffSet::mean0)
      .def_property_readonly("phi1_0", [](const CoeffSet& c) { return c.phi1.front(); })
      .def_property_readonly("phi2_0", [](const CoeffSet& c) { return c.phi2.front(); })
      .def_property_readonly("sites", [](const CoeffSet& c) { return c.beta.front(); });
  py::class_<LimitCoeffs, CoeffSet>(m, "LimitCoeffs");
  py::class_<FiniteCoeffs, CoeffSet>(m, "FiniteCoeffs").def_readonly("N", &FiniteCoeffs::N);

  m.def("default_step", &default_step);
  m.def("solve_limit_coeffs", &solve_limit_coeffs, py::arg("spec"), py::arg("dt"));
  m.def("solve_finite_coeffs", &solve_finite_coeffs, py::arg("spec"), py::arg("N"), py::arg("dt"));
  m.def("assemble_psi", &assemble_psi, py::arg("coeffs"), py::arg("P"), py::arg("j"), py::arg("t"));
  m.def("chi_at_zero", &chi_at_zero, py::arg("coeffs"), py::arg("P"));

  m.def("project_simplex", [](const Vector& v) { return project_simplex(v).values(); });
  m.def("project_ball", &project_ball);
  m.def(
      "discrete_ot",
      [](const Matrix& C, const Vector& P) {
        const TransportPlan plan = discrete_ot(C, P);
        return py::make_tuple(plan.value, plan.gamma, plan.assignment);
      },
      py::arg("costs"), py::arg("P"), "Returns (value, plan, assignment or None).");
  m.def(
      "solve_semidiscrete",
      [](const InitialDistribution& dist, const Matrix& sites, const Vector& P, double s_in, double delta) {
        SemidiscreteOptions o;
        o.s_in = s_in;
        o.delta = delta;
        const SemidiscreteResult r = solve_semidiscrete(dist, sites, P, o);
        return py::make_tuple(r.C, r.weights.g, r.weights.measures);
      },
      py::arg("dist"), py::arg("sites"), py::arg("P"), py::arg("s_in") = 3500.0, py::arg("delta") = 5e-5,
      "Returns (C, g, measures).");
  m.def("assign_destination", &assign_destination);

  m.def(
      "solve_finite",
      [](const ProblemSpec& s, const Matrix& X0, double dt) {
        FiniteOptions o;
        o.dt = dt;
        const FiniteSolution sol = solve_finite(s, X0, o);
        return py::make_tuple(sol.P_opt.values(), sol.lambda, sol.J_opt);
      },
      py::arg("spec"), py::arg("X0"), py::arg("dt") = 0.0, "Returns (P_opt, lambda, J_opt).");
  m.def(
      "finite_cost",
      [](const ProblemSpec& s, const FiniteCoeffs& fc, const Matrix& X0, const Vector& P) {
        return finite_cost(s, fc, X0, P).J;
      },
      py::arg("spec"), py::arg("coeffs"), py::arg("X0"), py::arg("P"));

  m.def(
      "limit_cost", [](const ProblemSpec& s, const LimitCoeffs& lc, const Vector& P) { return limit_cost(s, lc, P).J; },
      py::arg("spec"), py::arg("coeffs"), py::arg("P"));
  m.def(
      "solve_continuum",
      [](const ProblemSpec& s, const LimitCoeffs& lc, std::optional<Vector> P0) {
        ContinuumParams p;
        p.P0 = std::move(P0);
        const ContinuumSolution sol = solve_continuum(s, lc, p);
        return py::make_tuple(sol.P_star.values(), sol.J_star, sol.g_star.g);
      },
      py::arg("spec"), py::arg("coeffs"), py::arg("P0") = py::none(), "Returns (P_star, J_star, g_star).");

  m.def(
      "simulate_finite",
      [](const ProblemSpec& s, const FiniteCoeffs& fc, const Matrix& X0, const Vector& P,
         const std::vector<int>& lambda) {
        const TrajectoryBundle b = simulate(s, X0, FiniteStrategy{&fc, SimplexVector(P), lambda});
        return py::make_tuple(b.realized_cost, b.states.back(), b.times);
      },
      py::arg("spec"), py::arg("coeffs"), py::arg("X0"), py::arg("P"), py::arg("lambda_"),
      "Returns (realized_cost, final_states, times).");
  m.def(
      "simulate_continuum",
      [](const ProblemSpec& s, const LimitCoeffs& lc, const Matrix& X0, const Vector& P, const Vector& g) {
        const TrajectoryBundle b = simulate(s, X0, ContinuumStrategy{&lc, SimplexVector(P), g});
        return py::make_tuple(b.realized_cost, b.states.back(), b.assignments);
      },
      py::arg("spec"), py::arg("coeffs"), py::arg("X0"), py::arg("P"), py::arg("g"),
      "Returns (realized_cost, final_states, assignments).");

  m.attr("commands") = commands();
  m.def(
      "run_command",
      [](const std::string& cmd, const std::filesystem::path& config, const std::filesystem::path& out,
         std::uint64_t seed, bool override_horizon) {
        RunOptions o;
        o.out_dir = out;
        o.seed = seed;
        o.override_horizon = override_horizon;
        std::ostringstream so, se;
        const int rc = run_command(cmd, config, o, so, se);
        return py::make_tuple(rc, so.str(), se.str());
      },
      py::arg("command"), py::arg("config"), py::arg("out"), py::arg("seed") = 0,
      py::arg("override_horizon") = false, "Returns (exit_status, summary_text, error_text).");
  m.def(
      "run",
      [](const std::string& cmd, const std::filesystem::path& config, const std::filesystem::path& out,
         std::uint64_t seed) {
        RunOptions o;
        o.out_dir = out;
        o.seed = seed;
        return summary_dict(run(cmd, parse_config(config), o));
      },
      py::arg("command"), py::arg("config"), py::arg("out"), py::arg("seed") = 0);
}
