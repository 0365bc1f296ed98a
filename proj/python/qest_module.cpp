// Python bindings for the estimation toolkit. Matrices cross the boundary as
// numpy arrays; density matrices are validated on entry.

#include "qest/errors.hpp"
#include "qest/geometry.hpp"
#include "qest/linalg.hpp"
#include "qest/measure.hpp"
#include "qest/model_io.hpp"
#include "qest/montecarlo.hpp"
#include "qest/multiparam.hpp"
#include "qest/qfi.hpp"
#include "qest/sld.hpp"
#include "qest/state_model.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace qest;

PYBIND11_MODULE(_core, m) {
    m.doc() = "quantum estimation toolkit: information bounds, optimal measurements, "
              "and simulated estimation experiments";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::enum_<FamilyKind>(m, "FamilyKind")
        .value("unitary", FamilyKind::unitary)
        .value("kraus", FamilyKind::kraus)
        .value("mixture", FamilyKind::mixture)
        .value("pure_path", FamilyKind::pure_path)
        .value("diagonal", FamilyKind::diagonal)
        .value("expression", FamilyKind::expression);

    py::class_<StateFamily>(m, "StateFamily")
        .def_property_readonly("dim", &StateFamily::dim)
        .def_property_readonly("nparams", &StateFamily::nparams)
        .def_property_readonly("kind", &StateFamily::kind)
        .def_property_readonly("ranges", &StateFamily::ranges)
        .def("evaluate",
             [](const StateFamily& fam, const ParamPoint& p) {
                 return fam.evaluate(p).matrix();
             },
             py::arg("point"), "density matrix at the parameter point")
        .def("derivative", &StateFamily::derivative, py::arg("point"), py::arg("mu") = 0,
             "parameter derivative of the density matrix")
        .def("pure_state",
             [](const StateFamily& fam, const ParamPoint& p) { return fam.pure_state(p); },
             py::arg("point"), "state vector (pure-path families only)");

    py::class_<POVM>(m, "POVM")
        .def(py::init([](std::vector<CMatrix> elements, std::vector<std::string> labels) {
                 return POVM::create(std::move(elements), std::move(labels));
             }),
             py::arg("elements"), py::arg("labels") = std::vector<std::string>{})
        .def_readonly("elements", &POVM::elements)
        .def_readonly("labels", &POVM::labels);

    py::class_<SLDOperator>(m, "SLDOperator")
        .def_readonly("op", &SLDOperator::op)
        .def_readonly("support_rank", &SLDOperator::support_rank);

    py::class_<QFIReport>(m, "QFIReport")
        .def_readonly("H", &QFIReport::H)
        .def_readonly("classical_part", &QFIReport::classical_part)
        .def_readonly("quantum_part", &QFIReport::quantum_part);

    py::class_<FisherResult>(m, "FisherResult")
        .def_readonly("value", &FisherResult::value)
        .def_readonly("skipped", &FisherResult::skipped);

    py::class_<EstimatorOp>(m, "EstimatorOp")
        .def_readonly("op", &EstimatorOp::op)
        .def_readonly("at_lambda", &EstimatorOp::at_lambda);

    py::class_<QFIMatrix>(m, "QFIMatrix")
        .def_readonly("n", &QFIMatrix::n)
        .def_readonly("H", &QFIMatrix::H);

    py::class_<CRBBounds>(m, "CRBBounds")
        .def_readonly("per_parameter", &CRBBounds::per_parameter)
        .def_readonly("covariance", &CRBBounds::covariance)
        .def_readonly("condition", &CRBBounds::condition)
        .def_readonly("note", &CRBBounds::note);

    py::class_<BuresReport>(m, "BuresReport")
        .def_readonly("fidelity", &BuresReport::fidelity)
        .def_readonly("bures_sq", &BuresReport::bures_sq)
        .def_readonly("metric_fd", &BuresReport::metric_fd)
        .def_readonly("qfi_quarter", &BuresReport::qfi_quarter)
        .def_readonly("rel_err", &BuresReport::rel_err)
        .def_readonly("rank_warning", &BuresReport::rank_warning)
        .def_readonly("warning", &BuresReport::warning);

    py::class_<Estimability>(m, "Estimability")
        .def_readonly("snr", &Estimability::snr)
        .def_readonly("bounded", &Estimability::bounded)
        .def("measurements", &Estimability::measurements, py::arg("delta"),
             "budget to reach relative error delta");

    py::class_<Prior>(m, "Prior")
        .def("density", &Prior::density, py::arg("x"))
        .def("log_derivative", &Prior::log_derivative, py::arg("x"))
        .def_property_readonly("lo", &Prior::lo)
        .def_property_readonly("hi", &Prior::hi);

    py::class_<VanTreesReport>(m, "VanTreesReport")
        .def_readonly("z_f", &VanTreesReport::z_f)
        .def_readonly("z_h", &VanTreesReport::z_h)
        .def_readonly("prior_information", &VanTreesReport::prior_information)
        .def_readonly("bound", &VanTreesReport::bound);

    py::class_<ExperimentReport>(m, "ExperimentReport")
        .def_readonly("estimates", &ExperimentReport::estimates)
        .def_readonly("mean", &ExperimentReport::mean)
        .def_readonly("bias", &ExperimentReport::bias)
        .def_readonly("empirical_var", &ExperimentReport::empirical_var)
        .def_readonly("crb_classical", &ExperimentReport::crb_classical)
        .def_readonly("crb_quantum", &ExperimentReport::crb_quantum)
        .def_readonly("ratio_classical", &ExperimentReport::ratio_classical)
        .def_readonly("ratio_quantum", &ExperimentReport::ratio_quantum)
        .def_readonly("boundary_hits", &ExperimentReport::boundary_hits)
        .def_readonly("fisher_skipped", &ExperimentReport::fisher_skipped);

    // file loading
    m.def("load_model", &load_model, py::arg("path"), "read a model file");
    m.def("load_povm", &load_povm, py::arg("path"), "read a POVM file");
    m.def("load_prior", &load_prior, py::arg("path"), "read a prior file");
    m.def("file_digest", &file_digest, py::arg("path"), "64-bit content fingerprint, hex");

    // score operators and information
    m.def("sld",
          [](const StateFamily& fam, const ParamPoint& p, int mu) {
              DensityMatrix rho = fam.evaluate(p);
              return sld_eigen(rho, fam.derivative(p, mu));
          },
          py::arg("family"), py::arg("point"), py::arg("mu") = 0,
          "score operator of the family at a parameter point");
    m.def("sld_from_state",
          [](const CMatrix& rho, const CMatrix& drho, double rank_tol) {
              return sld_eigen(DensityMatrix(rho), drho, rank_tol);
          },
          py::arg("rho"), py::arg("drho"), py::arg("rank_tol") = kRankTol);
    m.def("qfi", &qfi_scalar, py::arg("family"), py::arg("point"),
          "information of a one-parameter family");
    m.def("qfi_decomposed", &qfi_decomposed, py::arg("family"), py::arg("point"),
          "information split into classical and quantum parts");
    m.def("qfi_pure", &qfi_pure, py::arg("family"), py::arg("point"));
    m.def("qfi_unitary", &qfi_unitary, py::arg("family"));
    m.def("qfi_from_state",
          [](const CMatrix& rho, const CMatrix& drho) {
              return qfi_from_state(DensityMatrix(rho), drho);
          },
          py::arg("rho"), py::arg("drho"));

    // measurements and estimators
    m.def("born_probs",
          [](const CMatrix& rho, const POVM& povm) {
              return born_probs(DensityMatrix(rho), povm);
          },
          py::arg("rho"), py::arg("povm"), "outcome probabilities");
    m.def("classical_fisher",
          [](const StateFamily& fam, const POVM& povm, const ParamPoint& p) {
              return classical_fisher(fam, povm, p);
          },
          py::arg("family"), py::arg("povm"), py::arg("point"));
    m.def("optimal_povm", &optimal_povm, py::arg("family"), py::arg("point"),
          "projective measurement attaining the full information");
    m.def("optimal_estimator", &optimal_estimator, py::arg("family"), py::arg("point"),
          "locally unbiased estimator observable");

    // multiparameter bounds
    m.def("qfi_matrix", &qfi_matrix, py::arg("family"), py::arg("point"));
    m.def("crb_bounds", &crb_bounds, py::arg("info"), py::arg("measurements") = 1);
    m.def("reparametrize", &reparametrize, py::arg("info"), py::arg("jacobian"),
          "information matrix in new coordinates, B H B^T");

    // geometry
    m.def("fidelity",
          [](const CMatrix& a, const CMatrix& b) {
              return fidelity(DensityMatrix(a), DensityMatrix(b));
          },
          py::arg("a"), py::arg("b"));
    m.def("bures_distance_sq",
          [](const CMatrix& a, const CMatrix& b) {
              return bures_distance_sq(DensityMatrix(a), DensityMatrix(b));
          },
          py::arg("a"), py::arg("b"));
    m.def("bures_metric_check", &bures_metric_check, py::arg("family"), py::arg("point"),
          py::arg("step") = 1e-3,
          "finite-difference check of the metric-information identity");

    // estimability and Bayesian bounds
    m.def("estimability", &estimability, py::arg("lam"), py::arg("H"),
          "signal-to-noise ratio of a parameter value");
    m.def("van_trees",
          [](const StateFamily& fam, const Prior& prior, long measurements,
             std::optional<POVM> povm) {
              return van_trees(fam, prior, measurements, povm ? &*povm : nullptr);
          },
          py::arg("family"), py::arg("prior"), py::arg("measurements") = 1,
          py::arg("povm") = std::nullopt, "Bayesian information bound under a prior");

    // simulation
    m.def("simulate",
          [](const StateFamily& fam, double true_lambda, const POVM& povm, long shots,
             long reps, std::uint64_t seed, double lo, double hi) {
              Experiment exp{fam, true_lambda, povm, shots, reps, seed, lo, hi};
              return crb_experiment(exp);
          },
          py::arg("family"), py::arg("true_lambda"), py::arg("povm"),
          py::arg("shots") = 1000, py::arg("reps") = 100, py::arg("seed") = 1,
          py::arg("lo") = 0.0, py::arg("hi") = 1.0,
          "repeated maximum-likelihood experiments against the variance bounds");
}
