#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hsparse/hsparse.hpp"

namespace py = pybind11;
using namespace hsparse;

namespace {

std::vector<Triplet<double>> to_triplets(const std::vector<std::tuple<index_t, index_t, double>>& entries) {
  std::vector<Triplet<double>> out;
  out.reserve(entries.size());
  for (const auto& [r, c, v] : entries) out.push_back({r, c, v});
  return out;
}

std::string printed(const sp_mat& m) {
  std::ostringstream os;
  os << m;
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hybrid CSC / red-black-tree sparse matrices";

  py::register_exception<BoundsError>(m, "BoundsError", PyExc_IndexError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<io::MatrixMarketError>(m, "MatrixMarketError", PyExc_ValueError);

  py::enum_<Format>(m, "Format").value("csc", Format::csc).value("rbt", Format::rbt).value("coo", Format::coo);
  py::enum_<Axis>(m, "Axis").value("rows", Axis::rows).value("cols", Axis::cols);

  py::class_<sp_mat>(m, "SpMat")
      .def(py::init<index_t, index_t>(), py::arg("n_rows"), py::arg("n_cols"))
      .def_static(
          "from_triplets",
          [](index_t r, index_t c, const std::vector<std::tuple<index_t, index_t, double>>& entries) {
            const auto ts = to_triplets(entries);
            return sp_mat::from_triplets(r, c, ts);
          },
          py::arg("n_rows"), py::arg("n_cols"), py::arg("entries"),
          "Build from (row, col, value) tuples; duplicates keep the last value.")
      .def_property_readonly("n_rows", &sp_mat::n_rows)
      .def_property_readonly("n_cols", &sp_mat::n_cols)
      .def_property_readonly("shape", [](const sp_mat& a) { return py::make_tuple(a.n_rows(), a.n_cols()); })
      .def_property_readonly("n_nonzero", &sp_mat::n_nonzero)
      .def_property_readonly("density", &sp_mat::density)
      .def_property_readonly("format", &sp_mat::format)
      .def("get", &sp_mat::get)
      .def("set", &sp_mat::set)
      .def("add_at", &sp_mat::add_at)
      .def("__getitem__", [](const sp_mat& a, std::pair<index_t, index_t> rc) { return a.get(rc.first, rc.second); })
      .def("__setitem__",
           [](sp_mat& a, std::pair<index_t, index_t> rc, double v) { a.set(rc.first, rc.second, v); })
      .def("ensure_csc", &sp_mat::ensure_csc)
      .def("ensure_rbt", &sp_mat::ensure_rbt)
      .def("ensure_coo", &sp_mat::ensure_coo)
      .def("triplets",
           [](const sp_mat& a) {
             std::vector<std::tuple<index_t, index_t, double>> out;
             for (const auto& t : a.triplets()) out.emplace_back(t.row, t.col, t.value);
             return out;
           })
      .def("to_dense",
           [](const sp_mat& a) {
             std::vector<std::vector<double>> rows(a.n_rows(), std::vector<double>(a.n_cols(), 0.0));
             a.for_each([&](index_t r, index_t c, double v) { rows[r][c] = v; });
             return rows;
           })
      .def("__eq__", [](const sp_mat& a, const sp_mat& b) { return a == b; })
      .def("__str__", &printed)
      .def("__repr__", [](const sp_mat& a) {
        return "SpMat(" + std::to_string(a.n_rows()) + "x" + std::to_string(a.n_cols()) +
               ", n_nonzero=" + std::to_string(a.n_nonzero()) + ")";
      })
      .def("__add__", [](const sp_mat& a, const sp_mat& b) { return sp_add(a, b); })
      .def("__matmul__", [](const sp_mat& a, const sp_mat& b) { return sp_mul(a, b); })
      .def("__mul__", [](const sp_mat& a, double k) { return scalar_mul(a, k); })
      .def("__rmul__", [](const sp_mat& a, double k) { return scalar_mul(a, k); })
      .def_property_readonly("T", [](const sp_mat& a) { return transpose(a); });

  m.def("speye", &speye<double>, py::arg("n_rows"), py::arg("n_cols"));
  m.def("sprandu", &sprandu<double>, py::arg("n_rows"), py::arg("n_cols"), py::arg("density"), py::arg("seed"));

  m.def("scalar_mul", &scalar_mul<double>);
  m.def("sp_add", &sp_add<double>);
  m.def("sp_mul", &sp_mul<double>);
  m.def("vec_mat_mul", [](const std::vector<double>& v, const sp_mat& a) { return vec_mat_mul<double>(v, a); });
  m.def("transpose", &transpose<double>);
  m.def("diag_extract", &diag_extract<double>);
  m.def("trace", &trace<double>);
  m.def("trace_fused_atb", &trace_fused_atb<double>);
  m.def("diagmat", &diagmat<double>);
  m.def("diagmat_fused_add", &diagmat_fused_add<double>);
  m.def("reverse", &reverse<double>, py::arg("a"), py::arg("axis"));
  m.def("sum_dim", &sum_dim<double>, py::arg("a"), py::arg("dim"));

  auto e = m.def_submodule("expr", "Lazy expression trees with fused evaluation");
  py::enum_<expr::Context>(e, "Context").value("value", expr::Context::value).value("trace", expr::Context::trace);
  // Leaves borrow their matrix; keep_alive ties its lifetime to the tree.
  py::class_<expr::Expr>(e, "Expr")
      .def("__add__", [](const expr::Expr& a, const expr::Expr& b) { return a + b; })
      .def("__matmul__", [](const expr::Expr& a, const expr::Expr& b) { return a * b; })
      .def("__rmul__", [](const expr::Expr& a, double k) { return k * a; })
      .def("__mul__", [](const expr::Expr& a, double k) { return k * a; })
      .def("__eq__", [](const expr::Expr& a, const expr::Expr& b) { return a == b; })
      .def_property_readonly("T", [](const expr::Expr& a) { return expr::t(a); })
      .def_property_readonly("shape", [](const expr::Expr& a) {
        const auto s = expr::infer_shape(a);
        return py::make_tuple(s.n_rows, s.n_cols);
      });
  e.def("leaf", [](const sp_mat& a) { return expr::leaf(a); }, py::keep_alive<0, 1>());
  e.def("t", &expr::t);
  e.def("diagmat", &expr::diagmat);
  e.def("rewrite", &expr::rewrite, py::arg("e"), py::arg("context") = expr::Context::value);
  e.def("count_fusions", &expr::count_fusions);
  e.def("eval", [](const expr::Expr& x, bool fuse) { return expr::eval(x, {.fuse = fuse}); }, py::arg("e"),
        py::arg("fuse") = true);
  e.def("eval_trace", [](const expr::Expr& x, bool fuse) { return expr::eval_trace(x, {.fuse = fuse}); },
        py::arg("e"), py::arg("fuse") = true);
  e.def("eval_diagmat", [](const expr::Expr& x, bool fuse) { return expr::eval_diagmat(x, {.fuse = fuse}); },
        py::arg("e"), py::arg("fuse") = true);

  m.def("save_matrix_market",
        [](const sp_mat& a, const std::filesystem::path& p) { io::save_matrix_market(a, p); });
  m.def("load_matrix_market", [](const std::filesystem::path& p) { return io::load_matrix_market(p); });
  m.def("dumps_matrix_market", [](const sp_mat& a) {
    std::ostringstream os;
    io::save_matrix_market(a, os);
    return os.str();
  });
  m.def("loads_matrix_market", [](const std::string& text) {
    std::istringstream is(text);
    return io::load_matrix_market(is);
  });
}
