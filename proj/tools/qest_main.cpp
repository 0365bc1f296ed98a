// qest: quantum estimation toolkit, command-line front end.
//
// Every subcommand prints exactly one JSON report object on standard output;
// human-readable warnings go to standard error. Exit codes: 0 success,
// 2 validation error (bad input, bad schema, bad flags), 3 numerical failure.

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

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr const char* kVersion = "1.0.0";

using ordered_json = nlohmann::ordered_json;
using namespace qest;

// --- report serialization ----------------------------------------------

// Floats carry 12 significant digits; non-finite values become null.
void write_json(std::ostream& os, const ordered_json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case ordered_json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ",\n";
                first = false;
                os << inner << ordered_json(it.key()).dump() << ": ";
                write_json(os, it.value(), indent + 1);
            }
            os << "\n" << pad << "}";
            return;
        }
        case ordered_json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            bool scalars = true;
            for (const auto& v : j) {
                if (v.is_structured()) scalars = false;
            }
            if (scalars) {
                os << "[";
                bool first = true;
                for (const auto& v : j) {
                    if (!first) os << ", ";
                    first = false;
                    write_json(os, v, indent);
                }
                os << "]";
                return;
            }
            os << "[\n";
            bool first = true;
            for (const auto& v : j) {
                if (!first) os << ",\n";
                first = false;
                os << inner;
                write_json(os, v, indent + 1);
            }
            os << "\n" << pad << "]";
            return;
        }
        case ordered_json::value_t::number_float: {
            double v = j.get<double>();
            if (!std::isfinite(v)) {
                os << "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.12g", v);
            os << buf;
            return;
        }
        default:
            os << j.dump();
            return;
    }
}

ordered_json cmat_json(const CMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(ordered_json::array({m(i, k).real(), m(i, k).imag()}));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json rmat_json(const RMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(m(i, k));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json rvec_json(const RVector& v) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

// --- shared CLI state ----------------------------------------------------

struct Options {
    std::string model_path;
    std::string povm_path;
    std::string prior_path;
    std::vector<double> lambda;
    std::string map_exprs;
    double step = 1e-3;
    double fd_step = 1e-5;
    long shots = 1000;
    long reps = 100;
    std::uint64_t seed = 1;
    std::optional<double> delta;
    long measurements = 1;
};

struct Report {
    ordered_json doc;
    std::vector<std::string> warnings;

    explicit Report(const std::vector<std::string>& argv_echo) {
        std::ostringstream echo;
        for (std::size_t i = 0; i < argv_echo.size(); ++i) {
            if (i) echo << ' ';
            echo << argv_echo[i];
        }
        doc["command"] = echo.str();
        doc["version"] = kVersion;
        doc["inputs"] = ordered_json::object();
        doc["results"] = ordered_json::object();
    }

    void input_file(const char* role, const std::string& path) {
        doc["inputs"][role] = {{"path", path}, {"digest", file_digest(path)}};
    }

    void warn(const std::string& message) {
        warnings.push_back(message);
        std::cerr << "warning: " << message << "\n";
    }

    void emit() {
        doc["warnings"] = warnings;
        write_json(std::cout, doc, 0);
        std::cout << "\n";
    }
};

ParamPoint point(const Options& opt, const StateFamily& fam) {
    if (static_cast<int>(opt.lambda.size()) != fam.nparams()) {
        throw ValidationError("--lambda: expected " + std::to_string(fam.nparams()) +
                              " comma-separated value(s) for this model, got " +
                              std::to_string(opt.lambda.size()));
    }
    return opt.lambda;
}

void require_single(const StateFamily& fam, const char* command, const char* alternative) {
    if (fam.nparams() != 1) {
        throw ValidationError(std::string(command) + ": model has " +
                              std::to_string(fam.nparams()) + " parameters; use " + alternative);
    }
}

// --- subcommand bodies ----------------------------------------------------

void run_qfi(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    require_single(fam, "qfi", "qfi-matrix");
    ParamPoint p = point(opt, fam);
    QFIReport r = qfi_scalar(fam, p);
    auto& res = report.doc["results"];
    res["H"] = r.H;
    try {
        QFIReport split = qfi_decomposed(fam, p);
        res["classical_part"] = split.classical_part;
        res["quantum_part"] = split.quantum_part;
    } catch (const NumericalError& e) {
        report.warn(std::string("classical/quantum split unavailable: ") + e.what());
    }
}

void run_sld(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    require_single(fam, "sld", "per-parameter derivatives with qfi-matrix");
    ParamPoint p = point(opt, fam);
    DensityMatrix rho = fam.evaluate(p);
    CMatrix drho = fam.derivative(p, 0);
    SLDOperator sld = sld_eigen(rho, drho);
    auto& res = report.doc["results"];
    res["operator"] = cmat_json(sld.op);
    res["support_rank"] = sld.support_rank;
    res["residual"] = lyapunov_residual(sld, rho, drho);
    if (sld.support_rank < fam.dim()) {
        report.warn("state is rank-deficient; the score operator is completed with zeros "
                    "on the unconstrained block");
    }
}

void run_povm_fisher(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    POVM povm = load_povm(opt.povm_path);
    report.input_file("povm", opt.povm_path);
    require_single(fam, "povm-fisher", "per-parameter derivatives with qfi-matrix");
    ParamPoint p = point(opt, fam);
    FisherResult f = classical_fisher(fam, povm, p);
    double h = qfi_scalar(fam, p).H;
    auto& res = report.doc["results"];
    res["fisher"] = f.value;
    res["H"] = h;
    res["efficiency"] = f.value / h;
    res["skipped_outcomes"] = f.skipped;
    if (f.skipped > 0) {
        report.warn(std::to_string(f.skipped) +
                    " outcome(s) had negligible probability and were excluded from the "
                    "information sum");
    }
}

void run_optimal_povm(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    require_single(fam, "optimal-povm", "per-parameter score operators");
    ParamPoint p = point(opt, fam);
    POVM povm = optimal_povm(fam, p);
    FisherResult f = classical_fisher(fam, povm, p);
    double h = qfi_scalar(fam, p).H;
    auto& res = report.doc["results"];
    ordered_json elements = ordered_json::array();
    for (const auto& e : povm.elements) {
        elements.push_back(cmat_json(e));
    }
    res["elements"] = std::move(elements);
    res["labels"] = povm.labels;
    res["fisher"] = f.value;
    res["H"] = h;
}

void run_estimator(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    require_single(fam, "estimator", "per-parameter score operators");
    ParamPoint p = point(opt, fam);
    EstimatorOp est = optimal_estimator(fam, p);
    CMatrix rho = fam.evaluate(p).matrix();
    double h = qfi_scalar(fam, p).H;
    CMatrix centered = est.op - est.at_lambda * CMatrix::Identity(fam.dim(), fam.dim());
    auto& res = report.doc["results"];
    res["operator"] = cmat_json(est.op);
    res["at_lambda"] = est.at_lambda;
    res["mean"] = (rho * est.op).trace().real();
    res["variance"] = (rho * centered * centered).trace().real();
    res["variance_bound"] = 1.0 / h;
}

void run_qfi_matrix(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    ParamPoint p = point(opt, fam);
    QFIMatrix info = qfi_matrix(fam, p);
    auto& res = report.doc["results"];
    res["n"] = info.n;
    res["H"] = rmat_json(info.H);
}

void run_crb(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    ParamPoint p = point(opt, fam);
    QFIMatrix info = qfi_matrix(fam, p);
    CRBBounds bounds = crb_bounds(info, opt.measurements);
    auto& res = report.doc["results"];
    res["measurements"] = opt.measurements;
    res["per_parameter"] = rvec_json(bounds.per_parameter);
    res["covariance"] = rmat_json(bounds.covariance);
    res["condition"] = bounds.condition;
    res["note"] = bounds.note;
}

void run_reparam(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    if (opt.map_exprs.empty()) {
        throw ValidationError(
            "reparam: --map is required (semicolon-separated expressions giving each "
            "original parameter in terms of the new ones)");
    }
    std::vector<Expr> coord_map;
    std::stringstream ss(opt.map_exprs);
    std::string piece;
    while (std::getline(ss, piece, ';')) {
        coord_map.push_back(Expr::parse(piece));
    }
    if (static_cast<int>(coord_map.size()) != fam.nparams()) {
        throw ValidationError("reparam: --map must supply exactly " +
                              std::to_string(fam.nparams()) + " expression(s)");
    }
    // --lambda holds the point in the NEW coordinates; map it to the model's.
    const ParamPoint& tilde = opt.lambda;
    RMatrix b = reparam_from_map(coord_map, tilde, opt.fd_step);
    ParamPoint mapped;
    for (const Expr& e : coord_map) {
        mapped.push_back(e.eval(tilde));
    }
    QFIMatrix info = qfi_matrix(fam, mapped);
    QFIMatrix tilted = reparametrize(info, b);
    auto& res = report.doc["results"];
    res["point"] = ordered_json(mapped);
    res["jacobian"] = rmat_json(b);
    res["H"] = rmat_json(info.H);
    res["H_new"] = rmat_json(tilted.H);
}

void run_bures_check(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    require_single(fam, "bures-check", "one-parameter slices");
    ParamPoint p = point(opt, fam);
    BuresReport r = bures_metric_check(fam, p, opt.step);
    auto& res = report.doc["results"];
    res["step"] = opt.step;
    res["fidelity"] = r.fidelity;
    res["bures_sq"] = r.bures_sq;
    res["metric_fd"] = r.metric_fd;
    res["qfi_quarter"] = r.qfi_quarter;
    res["rel_err"] = r.rel_err;
    res["rank_warning"] = r.rank_warning;
    if (r.rank_warning) {
        report.warn(r.warning);
    }
}

void run_estimability(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    require_single(fam, "estimability", "per-parameter information");
    ParamPoint p = point(opt, fam);
    double h = qfi_scalar(fam, p).H;
    Estimability e = estimability(p[0], h);
    auto& res = report.doc["results"];
    res["H"] = h;
    res["snr"] = e.snr;
    res["bounded"] = e.bounded;
    if (opt.delta) {
        res["delta"] = *opt.delta;
        res["measurements_needed"] = e.measurements(*opt.delta);
        if (!e.bounded) {
            report.warn("relative precision is unbounded at this point; no finite "
                        "measurement budget exists");
        }
    }
}

void run_van_trees(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    Prior prior = load_prior(opt.prior_path);
    report.input_file("prior", opt.prior_path);
    std::optional<POVM> povm;
    if (!opt.povm_path.empty()) {
        povm = load_povm(opt.povm_path);
        report.input_file("povm", opt.povm_path);
    }
    VanTreesReport r = van_trees(fam, prior, opt.measurements, povm ? &*povm : nullptr);
    auto& res = report.doc["results"];
    res["measurements"] = opt.measurements;
    res["z_f"] = r.z_f;
    res["z_h"] = r.z_h;
    res["prior_information"] = r.prior_information;
    res["bound"] = r.bound;
}

void run_simulate(const Options& opt, Report& report) {
    StateFamily fam = load_model(opt.model_path);
    report.input_file("model", opt.model_path);
    POVM povm = load_povm(opt.povm_path);
    report.input_file("povm", opt.povm_path);
    require_single(fam, "simulate", "one-parameter models");
    ParamPoint p = point(opt, fam);
    if (fam.ranges().empty()) {
        throw ValidationError(
            "simulate: the model must declare a parameter range; it bounds the "
            "likelihood search");
    }
    auto [lo, hi] = fam.ranges()[0];
    Experiment exp{fam, p[0], povm, opt.shots, opt.reps, opt.seed, lo, hi};
    ExperimentReport r = crb_experiment(exp);
    auto& res = report.doc["results"];
    res["shots"] = opt.shots;
    res["reps"] = opt.reps;
    res["seed"] = opt.seed;
    res["interval"] = ordered_json::array({lo, hi});
    res["mean"] = r.mean;
    res["bias"] = r.bias;
    res["empirical_var"] = r.empirical_var;
    res["crb_classical"] = r.crb_classical;
    res["crb_quantum"] = r.crb_quantum;
    res["ratio_classical"] = r.ratio_classical;
    res["ratio_quantum"] = r.ratio_quantum;
    res["boundary_hits"] = r.boundary_hits;
    res["fisher_skipped"] = r.fisher_skipped;
    res["estimates"] = ordered_json(r.estimates);
    if (r.boundary_hits > 0) {
        report.warn(std::to_string(r.boundary_hits) +
                    " estimate(s) landed on the search boundary; the spread is not "
                    "trustworthy there");
    }
    if (r.fisher_skipped > 0) {
        report.warn(std::to_string(r.fisher_skipped) +
                    " outcome(s) were excluded from the information sum for negligible "
                    "probability");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum estimation toolkit: information bounds, optimal measurements, "
                 "and simulated estimation experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("qest ") + kVersion);

    Options opt;
    auto add_model = [&](CLI::App* cmd) {
        cmd->add_option("--model", opt.model_path, "model file (JSON)")
            ->required();
    };
    auto add_lambda = [&](CLI::App* cmd) {
        cmd->add_option("--lambda", opt.lambda,
                        "parameter point, comma-separated for several parameters")
            ->required()
            ->delimiter(',');
    };

    CLI::App* qfi = app.add_subcommand("qfi", "information of a one-parameter model");
    add_model(qfi);
    add_lambda(qfi);

    CLI::App* sld = app.add_subcommand("sld", "score operator of a one-parameter model");
    add_model(sld);
    add_lambda(sld);

    CLI::App* povm_fisher =
        app.add_subcommand("povm-fisher", "information extracted by a given measurement");
    add_model(povm_fisher);
    add_lambda(povm_fisher);
    povm_fisher->add_option("--povm", opt.povm_path, "POVM file (JSON)")->required();

    CLI::App* optimal =
        app.add_subcommand("optimal-povm", "measurement that extracts the full information");
    add_model(optimal);
    add_lambda(optimal);

    CLI::App* estimator =
        app.add_subcommand("estimator", "locally unbiased estimator observable");
    add_model(estimator);
    add_lambda(estimator);

    CLI::App* qfi_matrix_cmd =
        app.add_subcommand("qfi-matrix", "information matrix of a multi-parameter model");
    add_model(qfi_matrix_cmd);
    add_lambda(qfi_matrix_cmd);

    CLI::App* crb = app.add_subcommand("crb", "variance bounds from the information matrix");
    add_model(crb);
    add_lambda(crb);
    crb->add_option("--measurements", opt.measurements, "number of repetitions M")
        ->check(CLI::PositiveNumber);

    CLI::App* reparam =
        app.add_subcommand("reparam", "information matrix in new coordinates");
    add_model(reparam);
    add_lambda(reparam);
    reparam->add_option("--map", opt.map_exprs,
                        "semicolon-separated expressions, one per original parameter, in "
                        "terms of the new ones (x1, x2, ...)")
        ->required();
    reparam->add_option("--step", opt.fd_step, "finite-difference step for the Jacobian");

    CLI::App* bures = app.add_subcommand(
        "bures-check", "finite-difference check of the metric-information identity");
    add_model(bures);
    add_lambda(bures);
    bures->add_option("--step", opt.step, "probe step (1e-6 to 1e-2)");

    CLI::App* estimability_cmd = app.add_subcommand(
        "estimability", "signal-to-noise ratio and measurement budget");
    add_model(estimability_cmd);
    add_lambda(estimability_cmd);
    estimability_cmd->add_option("--delta", opt.delta,
                                 "target relative error for the measurement budget");

    CLI::App* van_trees_cmd =
        app.add_subcommand("van-trees", "Bayesian information bound under a prior");
    add_model(van_trees_cmd);
    van_trees_cmd->add_option("--prior", opt.prior_path, "prior file (JSON)")->required();
    van_trees_cmd->add_option("--measurements", opt.measurements, "number of repetitions M")
        ->check(CLI::PositiveNumber);
    van_trees_cmd->add_option("--povm", opt.povm_path,
                              "measure with this POVM instead of the optimal one");

    CLI::App* simulate =
        app.add_subcommand("simulate", "maximum-likelihood estimation experiment");
    add_model(simulate);
    add_lambda(simulate);
    simulate->add_option("--povm", opt.povm_path, "POVM file (JSON)")->required();
    simulate->add_option("--shots", opt.shots, "measurements per estimate")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--reps", opt.reps, "independent repetitions")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", opt.seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    std::vector<std::string> echo;
    echo.push_back(std::filesystem::path(argv[0]).filename().string());
    for (int i = 1; i < argc; ++i) {
        echo.push_back(argv[i]);
    }
    Report report(echo);

    try {
        if (qfi->parsed()) run_qfi(opt, report);
        else if (sld->parsed()) run_sld(opt, report);
        else if (povm_fisher->parsed()) run_povm_fisher(opt, report);
        else if (optimal->parsed()) run_optimal_povm(opt, report);
        else if (estimator->parsed()) run_estimator(opt, report);
        else if (qfi_matrix_cmd->parsed()) run_qfi_matrix(opt, report);
        else if (crb->parsed()) run_crb(opt, report);
        else if (reparam->parsed()) run_reparam(opt, report);
        else if (bures->parsed()) run_bures_check(opt, report);
        else if (estimability_cmd->parsed()) run_estimability(opt, report);
        else if (van_trees_cmd->parsed()) run_van_trees(opt, report);
        else if (simulate->parsed()) run_simulate(opt, report);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }

    report.emit();
    return 0;
}
