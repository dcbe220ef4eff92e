#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "xfermse/errors.hpp"
#include "xfermse/estimators.hpp"
#include "xfermse/evalmetrics.hpp"
#include "xfermse/matrix_io.hpp"
#include "xfermse/ridge.hpp"
#include "xfermse/synthbench.hpp"

namespace py = pybind11;
using namespace xfermse;
using numkit::Matrix;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// 1-D arrays become a single column.
Matrix to_matrix(const Array& a) {
  if (a.ndim() == 1) return Matrix(a.shape(0), 1, std::vector<double>(a.data(), a.data() + a.size()));
  if (a.ndim() != 2) throw DimensionError("expected a 1-D or 2-D array");
  return Matrix(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  if (m.size()) std::memcpy(out.mutable_data(), m.data().data(), m.size() * sizeof(double));
  return out;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw DimensionError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

estimators::ComplexitySpec make_spec(std::size_t d, std::size_t d_t, std::size_t M, std::size_t H,
                                     std::size_t L, double delta, std::size_t n) {
  estimators::ComplexitySpec s;
  s.d = d;
  s.d_t = d_t;
  s.M = M;
  s.H = H;
  s.L = L;
  s.delta = delta;
  s.n = n;
  return s;
}

std::vector<estimators::Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<estimators::Method> out;
  for (const auto& n : names) out.push_back(estimators::parse_method(n));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regression transferability scores, bounds, and evaluation metrics";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_ArithmeticError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);

  // ---- ridge ----
  py::class_<ridge::RidgeSolution>(m, "RidgeSolution")
      .def_property_readonly("a", [](const ridge::RidgeSolution& s) { return to_array(s.a()); })
      .def_property_readonly("b", &ridge::RidgeSolution::b)
      .def_property_readonly("lam", &ridge::RidgeSolution::lambda)
      .def_property_readonly("mse_term", &ridge::RidgeSolution::mse_term)
      .def_property_readonly("penalty_term", &ridge::RidgeSolution::penalty_term)
      .def_property_readonly("objective", &ridge::RidgeSolution::objective)
      .def_property_readonly("n", &ridge::RidgeSolution::n)
      .def("predict",
           [](const ridge::RidgeSolution& s, const Array& x) {
             return to_array(ridge::predict(s, to_matrix(x)));
           });
  m.def(
      "ridge_fit",
      [](const Array& inputs, const Array& targets, double lam) {
        return ridge::ridge_fit(to_matrix(inputs), to_matrix(targets), lam);
      },
      py::arg("inputs"), py::arg("targets"), py::arg("lam") = 1.0);

  // ---- estimators ----
  py::class_<estimators::TransferScore>(m, "TransferScore")
      .def_property_readonly("method",
                             [](const estimators::TransferScore& s) {
                               return std::string(estimators::method_name(s.method));
                             })
      .def_readonly("lam", &estimators::TransferScore::lambda)
      .def_readonly("value", &estimators::TransferScore::value)
      .def_readonly("n", &estimators::TransferScore::n)
      .def_readonly("input_dim", &estimators::TransferScore::input_dim)
      .def_readonly("output_dim", &estimators::TransferScore::output_dim)
      .def_readonly("mse_term", &estimators::TransferScore::mse_term)
      .def_readonly("penalty_term", &estimators::TransferScore::penalty_term)
      .def("__repr__", [](const estimators::TransferScore& s) {
        return "TransferScore(" + std::string(estimators::method_name(s.method)) +
               ", lam=" + std::to_string(s.lambda) + ", value=" + std::to_string(s.value) + ")";
      });

  m.def(
      "lin_mse",
      [](const Array& f, const Array& y, double lam) {
        return estimators::lin_mse(to_matrix(f), to_matrix(y), lam);
      },
      py::arg("features"), py::arg("targets"), py::arg("lam") = 1.0);
  m.def(
      "lab_mse",
      [](const Array& d, const Array& y, double lam) {
        return estimators::lab_mse(to_matrix(d), to_matrix(y), lam);
      },
      py::arg("dummy_labels"), py::arg("targets"), py::arg("lam") = 1.0);
  m.def(
      "shared_lab_mse",
      [](const Array& s, const Array& y, double lam) {
        return estimators::shared_lab_mse(to_matrix(s), to_matrix(y), lam);
      },
      py::arg("source_labels"), py::arg("target_labels"), py::arg("lam") = 1.0);
  m.def(
      "estimate",
      [](const std::string& method, const Array& x, const Array& y, double lam) {
        return estimators::estimate(estimators::parse_method(method), to_matrix(x), to_matrix(y),
                                    lam);
      },
      py::arg("method"), py::arg("inputs"), py::arg("targets"), py::arg("lam") = 1.0);

  m.def(
      "complexity_term",
      [](std::size_t d, std::size_t d_t, std::size_t M, std::size_t H, std::size_t L,
         double delta) { return estimators::complexity_term(make_spec(d, d_t, M, H, L, delta, 1)); },
      py::arg("d"), py::arg("d_t"), py::arg("M"), py::arg("H"), py::arg("L"),
      py::arg("delta") = 0.05);
  m.def(
      "label_bound",
      [](double score, std::size_t d, std::size_t d_t, std::size_t M, std::size_t H, std::size_t L,
         double delta, std::size_t n) {
        return estimators::theorem1_lower_bound(score, make_spec(d, d_t, M, H, L, delta, n));
      },
      py::arg("score"), py::arg("d"), py::arg("d_t"), py::arg("M"), py::arg("H"), py::arg("L"),
      py::arg("delta"), py::arg("n"));
  m.def(
      "shared_label_bound",
      [](double score, double a_norm_sq, double source_loss, std::size_t d, std::size_t d_t,
         std::size_t M, std::size_t H, std::size_t L, double delta, std::size_t n) {
        return estimators::theorem2_lower_bound(score, a_norm_sq, source_loss,
                                                make_spec(d, d_t, M, H, L, delta, n));
      },
      py::arg("score"), py::arg("a_norm_sq"), py::arg("source_loss"), py::arg("d"),
      py::arg("d_t"), py::arg("M"), py::arg("H"), py::arg("L"), py::arg("delta"), py::arg("n"));

  py::class_<estimators::Lemma1Result>(m, "Lemma1Result")
      .def_readonly("lab_score", &estimators::Lemma1Result::lab_score)
      .def_readonly("neg_target_loss", &estimators::Lemma1Result::neg_target_loss)
      .def_readonly("gap", &estimators::Lemma1Result::gap)
      .def_readonly("holds", &estimators::Lemma1Result::holds);
  py::class_<estimators::Lemma2Result>(m, "Lemma2Result")
      .def_readonly("shared_score", &estimators::Lemma2Result::shared_score)
      .def_readonly("a_norm_sq", &estimators::Lemma2Result::a_norm_sq)
      .def_readonly("rhs", &estimators::Lemma2Result::rhs)
      .def_readonly("holds", &estimators::Lemma2Result::holds);
  m.def(
      "lemma1_check",
      [](const Array& f, const Array& d, const Array& y, double lam) {
        return estimators::lemma1_check(to_matrix(f), to_matrix(d), to_matrix(y), lam);
      },
      py::arg("features"), py::arg("dummy_labels"), py::arg("targets"), py::arg("lam"));
  m.def(
      "lemma2_check",
      [](const Array& s, const Array& t, const Array& f, double lam, double source_loss) {
        return estimators::lemma2_check(to_matrix(s), to_matrix(t), to_matrix(f), lam, source_loss);
      },
      py::arg("source_labels"), py::arg("target_labels"), py::arg("features"), py::arg("lam"),
      py::arg("source_loss"));

  // ---- evalmetrics ----
  py::class_<evalmetrics::CorrelationReport>(m, "CorrelationReport")
      .def_property_readonly("metric",
                             [](const evalmetrics::CorrelationReport& r) {
                               return std::string(evalmetrics::metric_name(r.metric));
                             })
      .def_readonly("value", &evalmetrics::CorrelationReport::value)
      .def_readonly("n_pairs", &evalmetrics::CorrelationReport::n_pairs)
      .def_readonly("p_value", &evalmetrics::CorrelationReport::p_value);
  m.def(
      "correlate",
      [](const Array& x, const Array& y, const std::string& metric) {
        const auto xs = to_vector(x), ys = to_vector(y);
        return evalmetrics::correlate(evalmetrics::parse_metric(metric), xs, ys);
      },
      py::arg("scores"), py::arg("actuals"), py::arg("metric") = "pearson");
  m.def(
      "linear_fit_rmse",
      [](const Array& x, const Array& y) {
        const auto xs = to_vector(x), ys = to_vector(y);
        return evalmetrics::linear_fit_rmse(xs, ys);
      },
      py::arg("scores"), py::arg("actuals"));

  py::class_<evalmetrics::TopKResult>(m, "TopKResult")
      .def_readonly("k", &evalmetrics::TopKResult::k)
      .def_readonly("rate", &evalmetrics::TopKResult::rate)
      .def_readonly("m_match", &evalmetrics::TopKResult::m_match)
      .def_readonly("m_target", &evalmetrics::TopKResult::m_target)
      .def_readonly("selected", &evalmetrics::TopKResult::selected)
      .def_readonly("best", &evalmetrics::TopKResult::best)
      .def_readonly("matched", &evalmetrics::TopKResult::matched);
  m.def(
      "top_k_matching_rate",
      [](const Array& scores, const Array& actual, std::size_t k) {
        return evalmetrics::top_k_matching_rate(to_matrix(scores), to_matrix(actual), k);
      },
      py::arg("scores"), py::arg("actuals"), py::arg("k") = 1);

  // ---- synthbench ----
  py::class_<synthbench::TaskSpec>(m, "TaskSpec")
      .def(py::init<>())
      .def_readwrite("seed", &synthbench::TaskSpec::seed)
      .def_readwrite("n_train", &synthbench::TaskSpec::n_train)
      .def_readwrite("n_test", &synthbench::TaskSpec::n_test)
      .def_readwrite("input_dim", &synthbench::TaskSpec::input_dim)
      .def_readwrite("feature_dim", &synthbench::TaskSpec::feature_dim)
      .def_readwrite("source_label_dim", &synthbench::TaskSpec::source_label_dim)
      .def_readwrite("target_label_dim", &synthbench::TaskSpec::target_label_dim)
      .def_readwrite("noise_std", &synthbench::TaskSpec::noise_std)
      .def_readwrite("alignment", &synthbench::TaskSpec::alignment);

  m.def(
      "run_benchmark",
      [](const synthbench::TaskSpec& spec, std::size_t n_sources, std::size_t n_targets,
         const std::vector<double>& lambdas, const std::vector<std::string>& methods) {
        const auto ms = parse_methods(methods);
        synthbench::BenchResult res;
        {
          py::gil_scoped_release nogil;
          const auto fam = synthbench::generate_task_family(spec, n_sources, n_targets);
          res = synthbench::run_benchmark(fam, lambdas, ms);
        }
        py::list pairs;
        for (const auto& p : res.pairs) {
          py::dict scores;
          for (const auto& s : p.scores)
            for (const auto& l : s.by_lambda)
              scores[py::make_tuple(std::string(estimators::method_name(s.method)), l.lambda)] =
                  l.value;
          py::dict d;
          d["source_id"] = p.source_id;
          d["target_id"] = p.target_id;
          d["actual_train_neg_mse"] = p.actual_train_neg_mse;
          d["actual_test_neg_mse"] = p.actual_test_neg_mse;
          d["scores"] = scores;
          pairs.append(d);
        }
        py::list corrs;
        for (const auto& c : res.correlations) {
          py::dict d;
          d["method"] = std::string(estimators::method_name(c.method));
          d["lam"] = c.lambda;
          d["metric"] = std::string(evalmetrics::metric_name(c.metric));
          d["value"] = c.report ? py::cast(c.report->value) : py::none();
          corrs.append(d);
        }
        py::dict out;
        out["pairs"] = pairs;
        out["correlations"] = corrs;
        return out;
      },
      py::arg("spec") = synthbench::TaskSpec{}, py::arg("n_sources") = 6,
      py::arg("n_targets") = 5, py::arg("lambdas") = std::vector<double>{0.0, 0.5, 1.0, 5.0},
      py::arg("methods") = std::vector<std::string>{"LinMSE", "LabMSE", "SharedLabMSE"});

  // ---- matrix io ----
  m.def(
      "read_matrix",
      [](const std::filesystem::path& path) { return to_array(io::read_matrix(path)); },
      py::arg("path"));
  m.def(
      "write_matrix",
      [](const std::filesystem::path& path, const Array& a) {
        io::write_matrix(path, to_matrix(a), io::format_for(path));
      },
      py::arg("path"), py::arg("matrix"));
}
