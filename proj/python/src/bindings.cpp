#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pafa/config.hpp"
#include "pafa/error.hpp"
#include "pafa/oaam.hpp"
#include "pafa/planner.hpp"
#include "pafa/qualifier.hpp"
#include "pafa/query.hpp"
#include "pafa/report.hpp"
#include "pafa/simkernel.hpp"

namespace py = pybind11;
using namespace pafa;

namespace {

py::object to_python(const meta::Value& v) {
  return std::visit(
      [](const auto& x) -> py::object {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, meta::EnumLiteral>) return py::str(x.literal);
        else if constexpr (std::is_same_v<T, meta::ObjectRef>) return py::dict(py::arg("ref") = x.id);
        else return py::cast(x);
      },
      v);
}

py::dict plan(const std::string& scenario) {
  auto out = planner::plan(oaam::parse_scenario(scenario));
  py::list unsatisfied;
  for (const auto& u : out.unsatisfied) unsatisfied.append(py::make_tuple(u.function, u.reason));
  py::dict d;
  d["outcome"] = planner::to_string(out.kind);
  d["config"] = out.config ? py::object(py::str(to_json(*out.config))) : py::object(py::none());
  d["unsatisfied"] = unsatisfied;
  return d;
}

py::dict qualify(const std::string& scenario, const std::string& config) {
  auto doc = oaam::parse_scenario(scenario);
  auto r = qualifier::qualify(configuration_from_json(config), oaam::build_store(doc), doc.safety_policy, doc.timing);
  py::list findings;
  for (const auto& f : r.findings) findings.append(py::make_tuple(f.check, f.element, f.detail));
  py::dict d;
  d["verdict"] = r.verdict == qualifier::Verdict::Accept ? "Accept" : "Reject";
  d["findings"] = findings;
  d["artifact"] = r.artifact;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pafa, m) {
  py::register_exception<Error>(m, "PafaError");

  m.def("validate", [](const std::string& scenario) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& v : oaam::validate_semantics(oaam::parse_scenario(scenario))) out.emplace_back(v.kind, v.element, v.detail);
    return out;
  });
  m.def("canonical_digest", [](const std::string& scenario) {
    return to_hex(oaam::canonical_digest(oaam::build_store(oaam::parse_scenario(scenario))));
  });
  m.def("query", [](const std::string& scenario, const std::string& text) {
    py::list out;
    for (const auto& v : query::eval_query(text, oaam::build_store(oaam::parse_scenario(scenario)))) out.append(to_python(v));
    return out;
  });
  m.def("plan", &plan);
  m.def("qualify", &qualify);
  m.def(
      "run",
      [](const std::string& scenario, std::int64_t cycles, std::uint64_t seed) {
        auto doc = oaam::parse_scenario(scenario);
        sim::EventLog log;
        {
          py::gil_scoped_release release;
          log = sim::run(doc, cycles, seed);
        }
        return py::make_tuple(to_hex(log.digest()), log.text());
      },
      py::arg("scenario"), py::arg("cycles"), py::arg("seed") = 0);
  m.def("report", [](const std::string& log, const std::string& scenario) {
    return report::make_report(report::parse_log(log), oaam::parse_scenario(scenario));
  });
}
