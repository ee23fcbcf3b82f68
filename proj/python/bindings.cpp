#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "pdfp/diagnostics.hpp"
#include "pdfp/experiment.hpp"
#include "pdfp/image_io.hpp"
#include "pdfp/solvers.hpp"
#include "pdfp/tomo.hpp"

namespace py = pybind11;
using namespace pdfp;

namespace {

StepSequence constant_steps(double v)
{
  return [v](std::size_t) { return v; };
}

Image image_from(const Mat &m)
{
  Image img = Image::zeros(m.rows(), m.cols());
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) { img(r, c) = m(r, c); }
  }
  return img;
}

Mat to_matrix(const Image &img)
{
  Mat m(img.height, img.width);
  for (Index r = 0; r < img.height; ++r) {
    for (Index c = 0; c < img.width; ++c) { m(r, c) = img(r, c); }
  }
  return m;
}

RunOptions run_options(bool store_iterates, const std::optional<Vec> &x_true)
{
  RunOptions opts;
  opts.store_iterates = store_iterates;
  opts.x_true = x_true;
  return opts;
}

std::pair<int, std::string> capture(const std::function<int(std::ostream &, std::ostream &)> &fn)
{
  std::ostringstream out, err;
  const int code = fn(out, err);
  return {code, out.str() + err.str()};
}

} // namespace

PYBIND11_MODULE(_pdfp, m)
{
  m.doc() = "Primal-dual fixed-point solvers for min f1(Dx) + f2(x)";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<UnsupportedProblem>(m, "UnsupportedProblem", PyExc_RuntimeError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

  py::enum_<TvVariant>(m, "TvVariant")
      .value("anisotropic", TvVariant::anisotropic)
      .value("isotropic", TvVariant::isotropic);
  py::enum_<BbNumerator>(m, "BbNumerator").value("literal", BbNumerator::literal).value("half", BbNumerator::half);

  py::class_<LinearOp>(m, "LinearOp")
      .def_property_readonly("in_dim", &LinearOp::in_dim)
      .def_property_readonly("out_dim", &LinearOp::out_dim)
      .def_property_readonly("name", &LinearOp::name)
      .def("forward", py::overload_cast<const Vec &>(&LinearOp::forward, py::const_))
      .def("adjoint", py::overload_cast<const Vec &>(&LinearOp::adjoint, py::const_));
  m.def("identity_op", &identity_op, py::arg("n"));
  m.def("zero_op", &zero_op, py::arg("in_dim"), py::arg("out_dim"));
  m.def("dense_op", &dense_op, py::arg("matrix"));
  m.def("sparse_op", [](const SparseMatrix::Storage &s) { return matrix_op(SparseMatrix(s)); }, py::arg("matrix"));
  m.def("diff_op_2d", &diff_op_2d, py::arg("height"), py::arg("width"));
  m.def("gaussian_blur_op", &gaussian_blur_op, py::arg("height"), py::arg("width"), py::arg("radius"),
        py::arg("sigma"));

  py::class_<ProxFn>(m, "ProxFn")
      .def_property_readonly("dim", &ProxFn::dim)
      .def_property_readonly("name", &ProxFn::name)
      .def("value", &ProxFn::value)
      .def("prox", py::overload_cast<double, const Vec &>(&ProxFn::prox, py::const_), py::arg("t"), py::arg("z"));
  m.def("zero_fn", &zero_fn, py::arg("dim"));
  m.def("l1_norm", &l1_norm, py::arg("dim"), py::arg("weight") = 1.0);
  m.def("tv_norm", &tv_norm, py::arg("height"), py::arg("width"), py::arg("variant"), py::arg("weight"));
  m.def("conjugate_prox", &conjugate_prox, py::arg("f"), py::arg("t"), py::arg("z"));

  py::class_<SmoothFn>(m, "SmoothFn")
      .def_property_readonly("dim", &SmoothFn::dim)
      .def_property_readonly("lipschitz", &SmoothFn::lipschitz)
      .def("value", &SmoothFn::value)
      .def("grad", py::overload_cast<const Vec &>(&SmoothFn::grad, py::const_));
  m.def("quadratic_fn", [](const LinearOp &A, const Vec &b) { return quadratic_fn(A, b); }, py::arg("A"),
        py::arg("b"));

  py::class_<Problem>(m, "Problem")
      .def_readonly("f1", &Problem::f1)
      .def_readonly("f2", &Problem::f2)
      .def_readonly("D", &Problem::D)
      .def_readonly("beta", &Problem::beta)
      .def_readonly("lambda_max_ddt", &Problem::lambda_max_ddt)
      .def_property_readonly("lambda_bound", &Problem::lambda_bound)
      .def_property_readonly("primal_dim", &Problem::primal_dim)
      .def_property_readonly("dual_dim", &Problem::dual_dim)
      .def("objective", &Problem::objective);
  m.def("make_problem", [](const ProxFn &f1, const SmoothFn &f2, const LinearOp &D) { return make_problem(f1, f2, D); },
        py::arg("f1"), py::arg("f2"), py::arg("D"));
  m.def("make_denoise_problem",
        [](const Mat &noisy, double mu, TvVariant variant) { return make_denoise_problem(image_from(noisy), mu, variant); },
        py::arg("noisy"), py::arg("mu"), py::arg("variant") = TvVariant::anisotropic);

  py::class_<PDState>(m, "PDState")
      .def(py::init<Vec, Vec>(), py::arg("v"), py::arg("x"))
      .def_readwrite("v", &PDState::v)
      .def_readwrite("x", &PDState::x);
  m.def("zero_state", &zero_state);

  py::class_<StoppingRule>(m, "StoppingRule")
      .def(py::init<double, std::size_t>(), py::arg("tol") = 1e-8, py::arg("max_iter") = 1000)
      .def_readwrite("tol", &StoppingRule::tol)
      .def_readwrite("max_iter", &StoppingRule::max_iter);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("iter", &TraceRecord::iter)
      .def_readonly("gamma", &TraceRecord::gamma)
      .def_readonly("lambda_", &TraceRecord::lambda)
      .def_readonly("alpha", &TraceRecord::alpha)
      .def_readonly("objective", &TraceRecord::objective)
      .def_readonly("residual", &TraceRecord::residual)
      .def_readonly("step", &TraceRecord::step)
      .def_readonly("snr", &TraceRecord::snr)
      .def_readonly("relerr", &TraceRecord::relerr)
      .def_readonly("inner_iters", &TraceRecord::inner_iters);
  py::class_<RunTrace>(m, "RunTrace")
      .def_readonly("records", &RunTrace::records)
      .def_readonly("iterates", &RunTrace::iterates)
      .def("to_csv", [](const RunTrace &t) {
        std::ostringstream out;
        write_trace_csv(t, out);
        return out.str();
      });
  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("state", &SolveResult::state)
      .def_readonly("trace", &SolveResult::trace)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("iterations", &SolveResult::iterations);

  py::class_<Schedule>(m, "Schedule")
      .def_property_readonly("name", &Schedule::name)
      .def("at", [](const Schedule &s, std::size_t n, const Vec &x) {
        const StepParams p = s.at(n, x);
        return py::make_tuple(p.gamma, p.lambda, p.alpha);
      });
  m.def("constant_schedule", &constant_schedule, py::arg("problem"), py::arg("gamma"), py::arg("lambda_"),
        py::arg("alpha") = 0.0);
  m.def(
      "bb_dynamic_schedule",
      [](const Problem &p, double lambda0, double alpha0, BbNumerator numerator) {
        return bb_dynamic_schedule(p, lambda0, alpha0, ScheduleClamp::defaults(p), numerator);
      },
      py::arg("problem"), py::arg("lambda_"), py::arg("alpha") = 0.0, py::arg("numerator") = BbNumerator::literal);
  m.def("convergent_perturbation_schedule", &convergent_perturbation_schedule, py::arg("problem"), py::arg("gamma"),
        py::arg("lambda_"), py::arg("alpha"), py::arg("decay"));

  m.def("apply_T", &apply_T, py::arg("problem"), py::arg("gamma"), py::arg("lambda_"), py::arg("u"));
  m.def(
      "pdfp2o",
      [](const Problem &p, double gamma, double lambda, const StoppingRule &stop, std::optional<PDState> u0,
         bool store_iterates, std::optional<Vec> x_true) {
        return pdfp2o(p, gamma, lambda, u0.value_or(zero_state(p)), stop, run_options(store_iterates, x_true));
      },
      py::arg("problem"), py::arg("gamma"), py::arg("lambda_"), py::arg("stop") = StoppingRule{},
      py::arg("u0") = py::none(), py::arg("store_iterates") = false, py::arg("x_true") = py::none());
  m.def(
      "pdfp2o_kappa",
      [](const Problem &p, double gamma, double lambda, double kappa, const StoppingRule &stop,
         std::optional<PDState> u0) { return pdfp2o_kappa(p, gamma, lambda, kappa, u0.value_or(zero_state(p)), stop); },
      py::arg("problem"), py::arg("gamma"), py::arg("lambda_"), py::arg("kappa"), py::arg("stop") = StoppingRule{},
      py::arg("u0") = py::none());
  m.def(
      "pdfp2o_ds",
      [](const Problem &p, const Schedule &s, const StoppingRule &stop, std::optional<PDState> u0,
         std::optional<Vec> x_true) {
        return pdfp2o_ds(p, s, u0.value_or(zero_state(p)), stop, run_options(false, x_true));
      },
      py::arg("problem"), py::arg("schedule"), py::arg("stop") = StoppingRule{}, py::arg("u0") = py::none(),
      py::arg("x_true") = py::none());
  m.def(
      "pdfp2o_dsn",
      [](const Problem &p, const Schedule &s, const StoppingRule &stop, std::optional<PDState> u0,
         bool store_iterates) {
        return pdfp2o_dsn(p, s, u0.value_or(zero_state(p)), stop, run_options(store_iterates, std::nullopt));
      },
      py::arg("problem"), py::arg("schedule"), py::arg("stop") = StoppingRule{}, py::arg("u0") = py::none(),
      py::arg("store_iterates") = false);
  m.def(
      "pfbs_fp2o",
      [](const Problem &p, double gamma, double lambda, double kappa, const StoppingRule &inner,
         const StoppingRule &stop) { return pfbs_fp2o(p, gamma, lambda, kappa, inner, zero_state(p), stop); },
      py::arg("problem"), py::arg("gamma"), py::arg("lambda_"), py::arg("kappa") = 0.0,
      py::arg("inner") = StoppingRule{1e-6, 10}, py::arg("stop") = StoppingRule{});
  m.def(
      "chambolle_pock",
      [](const Problem &p, double sigma, double tau, double theta, const StoppingRule &stop) {
        return chambolle_pock(p, constant_steps(sigma), constant_steps(tau), theta, zero_state(p), stop);
      },
      py::arg("problem"), py::arg("sigma"), py::arg("tau"), py::arg("theta") = 1.0, py::arg("stop") = StoppingRule{});
  m.def(
      "siu",
      [](const Problem &p, double delta, double nu, const StoppingRule &stop) {
        const SiuResult r = siu(p, constant_steps(delta), constant_steps(nu), split_zero_state(p), stop);
        return py::make_tuple(r.state.x, r.state.d, r.state.v, r.converged, r.iterations);
      },
      py::arg("problem"), py::arg("delta"), py::arg("nu"), py::arg("stop") = StoppingRule{});
  m.def(
      "ifp2o",
      [](const Mat &Q, const Vec &b, const ProxFn &f1, const LinearOp &D, double lambda, double kappa,
         const StoppingRule &stop) {
        const IfpResult r = ifp2o(Q, b, f1, D, lambda, kappa, stop);
        return py::make_tuple(r.x, r.v, r.converged, r.iterations);
      },
      py::arg("Q"), py::arg("b"), py::arg("f1"), py::arg("D"), py::arg("lambda_"), py::arg("kappa"),
      py::arg("stop") = StoppingRule{});

  m.def("lambda_norm", &lambda_norm, py::arg("u"), py::arg("lambda_"));
  m.def("snr", &snr, py::arg("x"), py::arg("x_true"));
  m.def("rel_err", &rel_err, py::arg("x"), py::arg("x_true"));
  m.def("fixed_point_residual", &fixed_point_residual, py::arg("problem"), py::arg("gamma"), py::arg("lambda_"),
        py::arg("u"));
  m.def("fejer_check", &fejer_check, py::arg("trace"), py::arg("u_ref"), py::arg("lambda_"), py::arg("slack") = 1e-10);
  py::class_<RateCertificate>(m, "RateCertificate")
      .def_readonly("mu", &RateCertificate::mu)
      .def_readonly("nu", &RateCertificate::nu)
      .def_readonly("eta", &RateCertificate::eta)
      .def_readonly("theta", &RateCertificate::theta)
      .def_readonly("d", &RateCertificate::d)
      .def("bound", &RateCertificate::bound);
  m.def("rate_certificate", &rate_certificate, py::arg("problem"), py::arg("gamma"), py::arg("lambda_"),
        py::arg("alpha_lo"), py::arg("alpha_hi"), py::arg("sigma"), py::arg("d") = py::none());

  m.def("shepp_logan", [](Index n) { return to_matrix(shepp_logan(n)); }, py::arg("n"));
  m.def(
      "projection_matrix",
      [](Index n, const std::vector<double> &angles, Index rays, double spacing) {
        return build_projection_matrix(TomoGeometry{n, angles, rays, spacing}).storage();
      },
      py::arg("n"), py::arg("angles_deg"), py::arg("rays"), py::arg("spacing") = 1.0);
  m.def(
      "make_tomo_problem",
      [](Index n, const std::vector<double> &angles, Index rays, double noise, std::uint64_t seed, double reg_weight,
         TvVariant variant) {
        const TomoProblem t = make_tomo_problem(TomoGeometry{n, angles, rays, 1.0}, noise, seed);
        return py::make_tuple(make_tv_problem(t, reg_weight, variant), t.b, t.x_true.pixels);
      },
      py::arg("n"), py::arg("angles_deg"), py::arg("rays"), py::arg("noise"), py::arg("seed"), py::arg("reg_weight"),
      py::arg("variant") = TvVariant::anisotropic);

  m.def(
      "solve",
      [](const std::filesystem::path &config) {
        return capture([&](std::ostream &o, std::ostream &e) { return solve_command(config, Overrides{}, o, e); });
      },
      py::arg("config"));
  m.def(
      "compare",
      [](const std::filesystem::path &a, const std::filesystem::path &b, const std::filesystem::path &out) {
        return capture([&](std::ostream &o, std::ostream &e) { return compare_command(a, b, out, Overrides{}, o, e); });
      },
      py::arg("config_a"), py::arg("config_b"), py::arg("out"));
  m.def(
      "certify",
      [](const std::filesystem::path &config) {
        return capture([&](std::ostream &o, std::ostream &e) { return certify_command(config, Overrides{}, o, e); });
      },
      py::arg("config"));
}
