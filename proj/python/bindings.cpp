#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pathfolio/calculus.hpp"
#include "pathfolio/strategies.hpp"
#include "pathfolio/universal.hpp"
#include "pathfolio/verify.hpp"

namespace py = pybind11;
using namespace pathfolio;

namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

// rows of a row-major [k][i] buffer
std::vector<std::vector<double>> rows_of(std::span<const double> flat, std::size_t d) {
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k * d < flat.size(); ++k) out.emplace_back(flat.begin() + k * d, flat.begin() + (k + 1) * d);
  return out;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

std::size_t width(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "empty strategy rows");
  return rows.front().size();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pathwise portfolio calculus on dyadic grids";

  static py::exception<Error> error(m, "PathfolioError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<double, int>(), py::arg("horizon"), py::arg("finest_level"))
      .def_property_readonly("horizon", &GridSpec::horizon)
      .def_property_readonly("finest_level", &GridSpec::finest_level)
      .def("points", &GridSpec::points)
      .def("time", &GridSpec::time)
      .def("step", &GridSpec::step)
      .def("times", [](const GridSpec& g, int level) { return grid_times(g, level); })
      .def(py::self == py::self)
      .def("__repr__", [](const GridSpec& g) {
        std::ostringstream os;
        os << "GridSpec(horizon=" << g.horizon() << ", finest_level=" << g.finest_level() << ")";
        return os.str();
      });

  py::class_<SampledPath>(m, "SampledPath")
      .def(py::init<GridSpec, std::vector<double>>(), py::arg("grid"), py::arg("values"))
      .def_property_readonly("grid", &SampledPath::grid)
      .def_property_readonly("values", [](const SampledPath& p) { return to_vector(p.values()); })
      .def("at_level", &SampledPath::at_level)
      .def("coarsened", &SampledPath::coarsened)
      .def("__len__", &SampledPath::size)
      .def(py::self == py::self);

  py::class_<MultiPath>(m, "MultiPath")
      .def(py::init<std::vector<SampledPath>, bool>(), py::arg("assets"), py::arg("positive") = true)
      .def_property_readonly("grid", &MultiPath::grid)
      .def_property_readonly("dimension", &MultiPath::dimension)
      .def_property_readonly("assets", &MultiPath::assets)
      .def_property_readonly("positive", &MultiPath::positive)
      .def("asset", &MultiPath::asset)
      .def("log", &MultiPath::log)
      .def(py::self == py::self);

  m.def("generate_walk", &generate_walk, py::arg("grid"), py::arg("seed"), py::arg("sigma"), py::arg("drift") = 0.0);
  m.def("generate_geometric", &generate_geometric, py::arg("grid"), py::arg("seed"), py::arg("sigma"),
        py::arg("drift") = 0.0, py::arg("s0") = 100.0);
  m.def("quadratic_variation", [](const SampledPath& p, int level) { return quadratic_variation(p, level).values; },
        py::arg("path"), py::arg("level"));
  m.def("covariation", [](const SampledPath& x, const SampledPath& y, int level) { return covariation(x, y, level).values; },
        py::arg("x"), py::arg("y"), py::arg("level"));
  m.def("covariation_matrix", [](const MultiPath& s, int level, std::size_t k) {
        return rows_of(covariation_matrix(s, level, k), s.dimension());
      }, py::arg("paths"), py::arg("level"), py::arg("t_index"));

  m.def("follmer_integral", [](const std::vector<std::vector<double>>& xi, const MultiPath& x, int level) {
        return follmer_integral(IntegrandPath(x.grid(), level, width(xi), flatten(xi)), x, level).values;
      }, py::arg("integrand"), py::arg("paths"), py::arg("level"),
      "Left-point sums of an integrand given as one row per level-n time.");
  m.def("doleans_exponential", [](const SampledPath& x, int level) {
        return doleans_exponential(x, quadratic_variation(x, level));
      }, py::arg("path"), py::arg("level"));
  m.def("ito_logarithm", &ito_logarithm, py::arg("path"), py::arg("level"));
  m.def("inversion_check", [](const SampledPath& p, int level) {
        const InversionDeviation d = inversion_check(p, level);
        return py::dict(py::arg("exp_of_log") = d.exp_of_log, py::arg("log_of_exp") = d.log_of_exp);
      }, py::arg("path"), py::arg("level"));
  m.def("exponential_ode_residual", &exponential_ode_residual, py::arg("path"), py::arg("level"));
  m.def("log_ito_deviation", &log_ito_deviation, py::arg("path"), py::arg("level"));

  py::class_<SimplexWeights>(m, "SimplexWeights")
      .def(py::init<std::vector<double>>(), py::arg("weights"))
      .def_static("equal", &SimplexWeights::equal)
      .def_static("vertex", &SimplexWeights::vertex)
      .def_property_readonly("values", [](const SimplexWeights& w) { return to_vector(w.values()); })
      .def("__len__", &SimplexWeights::dimension);

  m.def("portfolio_value", [](const std::vector<std::vector<double>>& pi, const MultiPath& s, int level, bool simplex) {
        const StrategyPath path(s.grid(), level, width(pi), flatten(pi),
                                simplex ? WeightMode::Simplex : WeightMode::Generalized);
        return portfolio_value(path, s, level);
      }, py::arg("weights"), py::arg("paths"), py::arg("level"), py::arg("simplex") = true,
      "Value of a strategy given as one weight row per level-n time.");
  m.def("constant_rebalanced_value", &constant_rebalanced_value, py::arg("weights"), py::arg("paths"), py::arg("level"));
  m.def("self_financing_residual", [](const std::vector<std::vector<double>>& pi, const MultiPath& s, int level) {
        const StrategyPath path(s.grid(), level, width(pi), flatten(pi), WeightMode::Generalized);
        return self_financing_residual(strategy_to_shares(path, s, level), s);
      }, py::arg("weights"), py::arg("paths"), py::arg("level"));

  py::class_<CppiResult>(m, "CppiResult")
      .def_property_readonly("weights", [](const CppiResult& r) { return rows_of(r.weights.values(), 2); })
      .def_readonly("value", &CppiResult::value)
      .def_readonly("cushion", &CppiResult::cushion)
      .def_readonly("money_market", &CppiResult::money_market)
      .def_readonly("leveraged_indices", &CppiResult::leveraged_indices)
      .def_property_readonly("self_financing_residual",
                             [](const CppiResult& r) { return self_financing_residual(cppi_shares(r), r.market); });
  m.def("cppi", [](const SampledPath& s, int level, double alpha, double multiplier, double rate) {
        return cppi(CppiParams{alpha, multiplier, rate}, s, level);
      }, py::arg("path"), py::arg("level"), py::arg("alpha") = 0.8, py::arg("multiplier") = 3.0, py::arg("rate") = 0.0);

  py::class_<DiscreteSimplexMeasure>(m, "DiscreteSimplexMeasure")
      .def(py::init([](const std::vector<std::vector<double>>& points, const std::vector<double>& weights) {
             if (points.size() != weights.size()) throw Error(ErrorCode::DimensionMismatch, "points and weights differ in length");
             std::vector<SimplexAtom> atoms;
             for (std::size_t k = 0; k < points.size(); ++k) atoms.push_back({SimplexWeights(points[k]), weights[k]});
             return DiscreteSimplexMeasure(std::move(atoms));
           }), py::arg("points"), py::arg("weights"))
      .def_property_readonly("points", [](const DiscreteSimplexMeasure& mu) {
        std::vector<std::vector<double>> out;
        for (const auto& a : mu.atoms()) out.push_back(to_vector(a.point.values()));
        return out;
      })
      .def_property_readonly("weights", [](const DiscreteSimplexMeasure& mu) {
        std::vector<double> out;
        for (const auto& a : mu.atoms()) out.push_back(a.weight);
        return out;
      })
      .def("__len__", &DiscreteSimplexMeasure::size);
  m.def("measure_uniform_dirichlet", &measure_uniform_dirichlet, py::arg("d"), py::arg("k"), py::arg("seed"));
  m.def("measure_grid", &measure_grid, py::arg("d"), py::arg("resolution"), py::arg("cap") = kDefaultGridAtomCap);

  py::class_<UniversalResult>(m, "UniversalResult")
      .def_readonly("v_hat", &UniversalResult::v_hat)
      .def_property_readonly("pi_hat", [](const UniversalResult& r) { return rows_of(r.pi_hat.values(), r.pi_hat.dimension()); })
      .def_readonly("atom_values", &UniversalResult::atom_values);
  m.def("universal_portfolio", &universal_portfolio, py::arg("measure"), py::arg("paths"), py::arg("level"));
  m.def("universal_consistency_residual", &universal_consistency_residual, py::arg("result"), py::arg("paths"),
        py::arg("level"));

  py::class_<InequalityReport>(m, "InequalityReport")
      .def_readonly("name", &InequalityReport::name)
      .def_readonly("times", &InequalityReport::times)
      .def_readonly("lhs", &InequalityReport::lhs)
      .def_readonly("rhs", &InequalityReport::rhs)
      .def_readonly("margins", &InequalityReport::margins)
      .def_readonly("min_margin", &InequalityReport::min_margin)
      .def_readonly("scale", &InequalityReport::scale)
      .def_readonly("passed", &InequalityReport::pass)
      .def_readonly("note", &InequalityReport::note);
  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_readonly("name", &ConvergenceReport::name)
      .def_readonly("levels", &ConvergenceReport::levels)
      .def_readonly("residuals", &ConvergenceReport::residuals)
      .def_readonly("monotone_decrease", &ConvergenceReport::monotone_decrease);
  py::class_<VerificationRun>(m, "VerificationRun")
      .def_readonly("inequalities", &VerificationRun::inequalities)
      .def_readonly("convergence", &VerificationRun::convergence)
      .def("passed", &VerificationRun::passed);

  m.def("check_geometric_mean_bound", [](const SimplexWeights& pi, const MultiPath& s, int level) {
        return check_geometric_mean_bound(pi, s, level);
      }, py::arg("weights"), py::arg("paths"), py::arg("level"));
  m.def("check_growth_rate", [](const SimplexWeights& pi, const MultiPath& s, int level) {
        return check_growth_rate(pi, s, level);
      }, py::arg("weights"), py::arg("paths"), py::arg("level"));
  m.def("check_variance_bound", [](const SimplexWeights& pi, const MultiPath& s, int level) {
        return check_variance_bound(pi, s, level);
      }, py::arg("weights"), py::arg("paths"), py::arg("level"));
  m.def("check_volatility_bound", [](const SimplexWeights& pi, const MultiPath& s, int level) {
        return check_volatility_bound(pi, s, level);
      }, py::arg("weights"), py::arg("paths"), py::arg("level"));
  m.def("convergence_suite", [](const std::string& fixture, const std::vector<int>& levels) {
        return convergence_suite(fixture, levels);
      }, py::arg("fixture"), py::arg("levels"));
  m.def("make_fixture", &make_fixture, py::arg("name"));
  m.def("run_verification", [](const MultiPath& s, const SimplexWeights& pi, int level, const std::vector<int>& levels) {
        return run_verification(s, pi, level, levels);
      }, py::arg("paths"), py::arg("weights"), py::arg("level"), py::arg("levels"));
}
