#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "blocknorm/cli.hpp"
#include "blocknorm/suites.hpp"
#include "blocknorm/summing.hpp"

namespace py = pybind11;
using namespace blocknorm;

namespace {

Exponent exponent(double p) { return std::isinf(p) ? Exponent::infinity() : Exponent(p); }

ClassSpec parse_class(const std::string& s) { return class_from_json(json(s), "class"); }

ClassStack parse_classes(const std::vector<std::string>& names) {
  ClassStack out;
  for (const std::string& s : names) out.push_back(parse_class(s));
  return out;
}

std::vector<VecSequence> sequences(const MultiOperator& t, const std::vector<std::vector<Vector>>& seqs) {
  if (seqs.size() != t.arity()) throw InputError("expected one sequence per operator slot");
  std::vector<VecSequence> out;
  for (std::size_t k = 0; k < seqs.size(); ++k) out.emplace_back(t.domains()[k], seqs[k]);
  return out;
}

std::vector<std::vector<Vector>> entries(const std::vector<VecSequence>& seqs) {
  std::vector<std::vector<Vector>> out;
  for (const VecSequence& s : seqs) out.push_back(s.entries);
  return out;
}

py::object to_python(const json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

MultiOperator make_operator(std::vector<LpSpace> domains, LpSpace codomain,
                            py::array_t<double, py::array::c_style | py::array::forcecast> tensor) {
  std::vector<std::size_t> want;
  for (const LpSpace& d : domains) want.push_back(d.dim);
  want.push_back(codomain.dim);
  if (static_cast<std::size_t>(tensor.ndim()) != want.size()) {
    throw InputError("tensor needs " + std::to_string(want.size()) + " axes");
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (static_cast<std::size_t>(tensor.shape(i)) != want[i]) throw InputError("tensor shape mismatch");
  }
  return MultiOperator(std::move(domains), codomain,
                       std::vector<double>(tensor.data(), tensor.data() + tensor.size()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<UnsupportedClassPosition>(m, "UnsupportedClassPosition", PyExc_ValueError);
  py::register_exception<NonvoidViolation>(m, "NonvoidViolation", PyExc_ValueError);

  py::class_<LpSpace>(m, "LpSpace")
      .def(py::init([](std::size_t dim, double p) { return LpSpace(dim, exponent(p)); }),
           py::arg("dim"), py::arg("p"))
      .def_property_readonly("dim", [](const LpSpace& s) { return s.dim; })
      .def_property_readonly("p", [](const LpSpace& s) { return s.exp.value(); })
      .def("__repr__", [](const LpSpace& s) { return "LpSpace(" + to_json(s).dump() + ")"; });

  py::class_<Block>(m, "Block")
      .def_static("full", &Block::full, py::arg("bounds"))
      .def_static("diagonal", &Block::diagonal, py::arg("bounds"))
      .def_static("equality", &Block::equality, py::arg("first"), py::arg("second"), py::arg("bounds"))
      .def_static("explicit", &Block::explicit_set, py::arg("bounds"), py::arg("members"))
      .def_property_readonly("bounds", &Block::bounds)
      .def_property_readonly("members", &Block::members)
      .def("__contains__", [](const Block& b, const std::vector<std::size_t>& t) { return b.contains(t); })
      .def("__len__", [](const Block& b) { return b.members().size(); });

  py::class_<MultiOperator>(m, "MultiOperator")
      .def(py::init(&make_operator), py::arg("domains"), py::arg("codomain"), py::arg("tensor"))
      .def_property_readonly("arity", &MultiOperator::arity)
      .def_property_readonly("domains", &MultiOperator::domains)
      .def_property_readonly("codomain", &MultiOperator::codomain)
      .def("__call__", [](const MultiOperator& t, const std::vector<Vector>& xs) { return t(xs); })
      .def("scaled", &MultiOperator::scaled);

  m.def("finite_type",
        [](const std::vector<std::pair<LpSpace, Vector>>& functionals, const LpSpace& codomain,
           const Vector& b) {
          std::vector<Vec> phis;
          for (const auto& [s, v] : functionals) phis.emplace_back(s, v);
          return finite_type(phis, Vec(codomain, b));
        },
        py::arg("functionals"), py::arg("codomain"), py::arg("b"));

  m.def("lp_norm", [](const Vector& x, double p) { return lp_norm(x, exponent(p)); },
        py::arg("x"), py::arg("p"));

  m.def("class_norm",
        [](const std::string& spec, const LpSpace& space, const std::vector<Vector>& seq,
           std::size_t budget, std::uint64_t seed) {
          const NormResult r = class_norm(parse_class(spec), VecSequence(space, seq), {budget, seed});
          return py::make_tuple(r.value, r.exact);
        },
        py::arg("spec"), py::arg("space"), py::arg("sequence"), py::arg("budget") = 32,
        py::arg("seed") = 0);

  m.def("sup_norm",
        [](const MultiOperator& t, std::size_t budget, std::uint64_t seed) {
          const NormResult r = sup_norm(t, {budget, seed});
          return py::make_tuple(r.value, r.exact);
        },
        py::arg("op"), py::arg("budget") = 32, py::arg("seed") = 0);

  m.def("block_value",
        [](const MultiOperator& t, const Block& b, const std::vector<std::string>& stack,
           const std::vector<std::vector<Vector>>& seqs, std::size_t budget, std::uint64_t seed) {
          return block_value(t, b, parse_classes(stack), sequences(t, seqs), {budget, seed}).value;
        },
        py::arg("op"), py::arg("block"), py::arg("stack"), py::arg("sequences"),
        py::arg("budget") = 32, py::arg("seed") = 0);

  m.def("summing_norm",
        [](const MultiOperator& t, const Block& b, const std::vector<std::string>& x,
           const std::vector<std::string>& stack, std::size_t k, std::size_t budget,
           std::uint64_t seed) {
          const SummingEstimate e =
              summing_norm(t, b, parse_classes(x), parse_classes(stack), k, {budget, seed});
          py::dict d;
          d["value"] = e.value;
          d["exact"] = e.exact;
          d["witness"] = entries(e.witness);
          d["family"] = e.family;
          d["evaluations"] = e.evaluations;
          return d;
        },
        py::arg("op"), py::arg("block"), py::arg("x"), py::arg("stack"), py::arg("k"),
        py::arg("budget") = 32, py::arg("seed") = 0);

  m.def("compatibility_margin",
        [](const std::vector<std::string>& x, const std::vector<std::string>& stack, const Block& b,
           const std::vector<ScalarSequence>& lambdas) {
          return compatibility_margin(parse_classes(x), parse_classes(stack), b, lambdas);
        },
        py::arg("x"), py::arg("stack"), py::arg("block"), py::arg("lambdas"));

  m.def("find_incompatibility_witness",
        [](const std::vector<std::string>& x, const std::vector<std::string>& stack, const Block& b,
           std::size_t k, std::size_t budget, std::uint64_t seed) {
          return to_python(
              to_json(find_incompatibility_witness(parse_classes(x), parse_classes(stack), b, k, {budget, seed})));
        },
        py::arg("x"), py::arg("stack"), py::arg("block"), py::arg("k"), py::arg("budget") = 32,
        py::arg("seed") = 0);

  m.def("suite_names", &suite_names);

  m.def("run_suite",
        [](const std::string& name, std::size_t instances, std::uint64_t seed, std::size_t budget) {
          SuiteOptions o;
          o.instances = instances;
          o.seed = seed;
          o.budget = budget;
          return to_python(to_json(run_suite(name, o)));
        },
        py::arg("name"), py::arg("instances") = 50, py::arg("seed") = 0, py::arg("budget") = 8);

  m.def("run_config",
        [](const std::string& text, const std::string& command, std::optional<std::uint64_t> seed,
           std::size_t jobs, const std::string& base_dir) {
          const json config = cli::parse_config(text);
          cli::Overrides o;
          o.seed = seed;
          const cli::Outcome out =
              cli::execute(command, config, cli::resolve_settings(config, o, std::nullopt), jobs, base_dir);
          return py::make_tuple(to_python(out.report), out.exit_code);
        },
        py::arg("config"), py::arg("command") = "run", py::arg("seed") = py::none(),
        py::arg("jobs") = 1, py::arg("base_dir") = "");

  m.def("strip_timing", [](const std::string& report) {
    return to_python(cli::strip_timing(json::parse(report)));
  });

  m.attr("__version__") = cli::version();
}
