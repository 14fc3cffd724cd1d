#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mmdn/hybrid.hpp"

namespace py = pybind11;
using namespace mmdn;

namespace {

std::vector<Vec> matrix_rows(const Matrix& m) {
    std::vector<Vec> rows(m.rows(), Vec(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    return rows;
}

KernelSpec make_kernel(const std::string& family, double theta) {
    if (family == "gaussian") return {KernelFamily::Gaussian, theta};
    if (family == "laplace") return {KernelFamily::Laplace, theta};
    throw ContractViolation("kernel family must be 'gaussian' or 'laplace'");
}

PointSet make_set(const std::vector<Vec>& pts) {
    PointSet s{pts};
    s.require_uniform_dim();
    return s;
}

StackedDecision make_stacked(const std::vector<Vec>& pts) {
    if (pts.empty()) throw ContractViolation("empty decision set");
    Vec data;
    for (const auto& p : pts) data.insert(data.end(), p.begin(), p.end());
    return {pts.size(), pts.front().size(), std::move(data)};
}

}  // namespace

PYBIND11_MODULE(_mmdn, m) {
    m.doc() = "MMD-Newton multi-objective optimization toolkit";

    py::class_<ProblemDef>(m, "Problem")
        .def_readonly("name", &ProblemDef::name)
        .def_readonly("n", &ProblemDef::n)
        .def_readonly("k", &ProblemDef::k)
        .def_readonly("lower", &ProblemDef::lower)
        .def_readonly("upper", &ProblemDef::upper)
        .def("evaluate", [](const ProblemDef& p, const Vec& x) { return p.evaluate(x); })
        .def("jacobian",
             [](const ProblemDef& p, const Vec& x) { return matrix_rows(p.jacobian(x)); })
        .def("hessian_tensor",
             [](const ProblemDef& p, const Vec& x) {
                 std::vector<std::vector<Vec>> out;
                 for (const auto& h : p.hessian_tensor(x)) out.push_back(matrix_rows(h));
                 return out;
             })
        .def("front_sample", [](const ProblemDef& p, std::size_t count) {
            return problems::front_sample(p, count).points;
        });

    m.def("make_problem", &problems::make_problem, py::arg("name"), py::arg("n") = 0);
    m.def("available_problems", [] { return problems::available(); });

    m.def(
        "mmd_sq",
        [](const std::vector<Vec>& y, const std::vector<Vec>& r, const std::string& family,
           double theta) { return mmd::mmd_sq(make_set(y), make_set(r), make_kernel(family, theta)); },
        py::arg("y"), py::arg("r"), py::arg("kernel") = "gaussian", py::arg("theta") = 1.0);

    m.def(
        "mmd_grad_objective",
        [](const std::vector<Vec>& y, const std::vector<Vec>& r, const std::string& family,
           double theta) {
            return mmd::grad_objective(make_set(y), make_set(r), make_kernel(family, theta));
        },
        py::arg("y"), py::arg("r"), py::arg("kernel") = "gaussian", py::arg("theta") = 1.0);

    m.def(
        "mmd_grad_decision",
        [](const std::vector<Vec>& x, const ProblemDef& problem, const std::vector<Vec>& r,
           const std::string& family, double theta) {
            return mmd::grad_decision(make_stacked(x), problem, make_set(r),
                                      make_kernel(family, theta));
        },
        py::arg("x"), py::arg("problem"), py::arg("r"), py::arg("kernel") = "gaussian",
        py::arg("theta") = 1.0);

    m.def(
        "mmd_hess_objective",
        [](const std::vector<Vec>& y, const std::vector<Vec>& r, const std::string& family,
           double theta) {
            return matrix_rows(
                mmd::hess_objective(make_set(y), make_set(r), make_kernel(family, theta)));
        },
        py::arg("y"), py::arg("r"), py::arg("kernel") = "gaussian", py::arg("theta") = 1.0);

    m.def(
        "mmdn_run",
        [](const std::vector<Vec>& x0, const ProblemDef& problem, const std::vector<Vec>& r,
           const std::string& family, double theta, std::size_t max_iter, double eps,
           const std::string& bounds) {
            NewtonOptions opts;
            opts.max_iter = max_iter;
            opts.eps = eps;
            opts.mode = bounds == "clip" ? BoundsMode::Clip : BoundsMode::ActiveSet;
            const auto [state, trace] = newton::mmdn_run(make_stacked(x0), problem, make_set(r),
                                                         make_kernel(family, theta), opts);
            std::vector<Vec> xs;
            for (std::size_t i = 0; i < state.x.mu; ++i) xs.push_back(state.x.point(i));
            py::dict out;
            out["x"] = xs;
            out["grad_norm"] = state.grad_norm;
            out["iterations"] = state.iteration;
            out["mmd2"] = trace.final_mmd_sq;
            out["trace"] = trace.to_lines();
            return out;
        },
        py::arg("x0"), py::arg("problem"), py::arg("r"), py::arg("kernel") = "gaussian",
        py::arg("theta") = 1.0, py::arg("max_iter") = 5, py::arg("eps") = 1e-6,
        py::arg("bounds") = "active-set");

    m.def(
        "nsga2_run",
        [](const ProblemDef& problem, std::size_t mu, std::size_t generations,
           std::uint64_t seed) {
            MoeaConfig cfg;
            cfg.pop_size = mu;
            cfg.seed = seed;
            const auto pop = moea::nsga2_run(problem, cfg, generations);
            std::vector<Vec> xs, fs;
            for (const auto& ind : pop.individuals) {
                xs.push_back(ind.x);
                fs.push_back(ind.f);
            }
            py::dict out;
            out["x"] = xs;
            out["f"] = fs;
            out["eval_count"] = pop.eval_count;
            return out;
        },
        py::arg("problem"), py::arg("mu"), py::arg("generations"), py::arg("seed") = 1);

    m.def(
        "generate_reference_set",
        [](const std::vector<Vec>& y0, std::size_t mu, double delta, std::uint64_t seed) {
            ReferenceSetConfig cfg;
            cfg.target_size = mu;
            cfg.delta = delta;
            cfg.seed = seed;
            return refset::generate_reference_set(make_set(y0), cfg).points.points;
        },
        py::arg("y0"), py::arg("mu"), py::arg("delta") = 0.08, py::arg("seed") = 1);

    m.def("gd_p",
          [](const std::vector<Vec>& a, const std::vector<Vec>& f, double p) {
              return metrics::gd_p(make_set(a), make_set(f), p);
          },
          py::arg("approx"), py::arg("front"), py::arg("p") = 2.0);
    m.def("igd_p",
          [](const std::vector<Vec>& a, const std::vector<Vec>& f, double p) {
              return metrics::igd_p(make_set(a), make_set(f), p);
          },
          py::arg("approx"), py::arg("front"), py::arg("p") = 2.0);
    m.def("delta_p",
          [](const std::vector<Vec>& a, const std::vector<Vec>& f, double p) {
              return metrics::delta_p(make_set(a), make_set(f), p);
          },
          py::arg("approx"), py::arg("front"), py::arg("p") = 2.0);

    m.def(
        "run_hybrid",
        [](const std::string& problem, std::uint64_t seed, std::size_t mu, std::size_t n1,
           std::size_t n2, const std::string& kernel, double theta) {
            RunConfig cfg;
            cfg.problem = problem;
            cfg.mu = mu;
            cfg.n1 = n1;
            cfg.n2 = n2;
            cfg.kernel = kernel;
            cfg.theta = theta;
            const RunRecord rec = hybrid::run_hybrid(cfg, seed);
            py::dict out;
            out["problem"] = rec.problem;
            out["seed"] = rec.seed;
            out["delta2"] = rec.delta2;
            out["mmd2"] = rec.final_mmd2;
            out["kernel_family"] = rec.kernel_family;
            out["kernel_theta"] = rec.kernel_theta;
            out["stop"] = rec.stop_reason;
            out["json"] = hybrid::record_to_json(rec);
            return out;
        },
        py::arg("problem"), py::arg("seed") = 1, py::arg("mu") = 0, py::arg("n1") = 300,
        py::arg("n2") = 5, py::arg("kernel") = "auto", py::arg("theta") = 1.0);
}
