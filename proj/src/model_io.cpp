#include "qest/model_io.hpp"

#include "qest/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace qest {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ValidationError(path + ": " + message);
}

std::string read_file(const std::string& filename) {
    std::ifstream in(filename, std::ios::binary);
    if (!in) {
        throw ValidationError(filename + ": cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json parse_document(const std::string& filename) {
    std::string text = read_file(filename);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(filename + ": not valid JSON: " + e.what());
    }
}

const json& need(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) {
        fail(path, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        fail(path, std::string("missing required field '") + key + "'");
    }
    return *it;
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        fail(path, "expected a number");
    }
    return j.get<double>();
}

long get_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) {
        fail(path, "expected an integer");
    }
    return j.get<long>();
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) {
        fail(path, "expected a string");
    }
    return j.get<std::string>();
}

std::string number_literal(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    if (v < 0.0) {
        return std::string("(0") + buf + ")";  // "-x" as the expression "(0-x)"
    }
    return buf;
}

Expr expr_at(const json& j, const std::string& path) {
    std::string text;
    if (j.is_string()) {
        text = j.get<std::string>();
    } else if (j.is_number()) {
        text = number_literal(j.get<double>());
    } else {
        fail(path, "expected an expression string or a number");
    }
    try {
        return Expr::parse(text);
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
}

EntryExpr entry_at(const json& j, const std::string& path) {
    EntryExpr out{Expr::parse("0"), std::nullopt};
    if (j.is_number() || j.is_string()) {
        out.re = expr_at(j, path);
        return out;
    }
    if (j.is_array()) {
        if (j.size() != 2) {
            fail(path, "a complex literal is a two-element [re, im] array");
        }
        out.re = expr_at(j[0], path + "[0]");
        out.im = expr_at(j[1], path + "[1]");
        return out;
    }
    if (j.is_object()) {
        out.re = expr_at(need(j, "re", path), path + ".re");
        if (j.contains("im")) {
            out.im = expr_at(j["im"], path + ".im");
        }
        return out;
    }
    fail(path, "expected a matrix entry: number, expression string, [re, im], or {re, im}");
}

Complex complex_at(const json& j, const std::string& path) {
    if (j.is_number()) {
        return Complex(j.get<double>(), 0.0);
    }
    if (j.is_array()) {
        if (j.size() != 2) {
            fail(path, "a complex literal is a two-element [re, im] array");
        }
        return Complex(get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]"));
    }
    fail(path, "expected a number or a two-element [re, im] array");
}

CMatrix cmatrix_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
        fail(path, "expected a non-empty array of matrix rows");
    }
    const std::size_t rows = j.size();
    CMatrix m;
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = j[i];
        std::string row_path = path + "[" + std::to_string(i) + "]";
        if (!row.is_array() || row.size() != rows) {
            fail(row_path, "matrix rows must be arrays matching the matrix dimension");
        }
        if (i == 0) {
            m.resize(rows, rows);
        }
        for (std::size_t k = 0; k < rows; ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                complex_at(row[k], row_path + "[" + std::to_string(k) + "]");
        }
    }
    return m;
}

ExprMatrix expr_matrix_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
        fail(path, "expected a non-empty array of matrix rows");
    }
    ExprMatrix m;
    const std::size_t rows = j.size();
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = j[i];
        std::string row_path = path + "[" + std::to_string(i) + "]";
        if (!row.is_array() || row.size() != rows) {
            fail(row_path, "matrix rows must be arrays matching the matrix dimension");
        }
        std::vector<EntryExpr> out_row;
        out_row.reserve(rows);
        for (std::size_t k = 0; k < rows; ++k) {
            out_row.push_back(entry_at(row[k], row_path + "[" + std::to_string(k) + "]"));
        }
        m.push_back(std::move(out_row));
    }
    return m;
}

DerivSpec deriv_at(const json& doc, const std::string& path) {
    DerivSpec spec;
    if (!doc.contains("derivative")) {
        return spec;
    }
    const json& d = doc["derivative"];
    std::string dpath = path + ".derivative";
    if (!d.is_object()) {
        fail(dpath, "expected an object with 'mode' and optional 'step'");
    }
    if (d.contains("mode")) {
        std::string mode = get_string(d["mode"], dpath + ".mode");
        if (mode == "analytic") {
            spec.mode = DerivMode::analytic;
        } else if (mode == "central_difference") {
            spec.mode = DerivMode::central_difference;
        } else {
            fail(dpath + ".mode", "expected 'analytic' or 'central_difference'");
        }
    }
    if (d.contains("step")) {
        spec.step = get_number(d["step"], dpath + ".step");
    }
    return spec;
}

std::vector<std::pair<double, double>> ranges_at(const json& doc, const std::string& path) {
    std::vector<std::pair<double, double>> out;
    if (!doc.contains("ranges")) {
        return out;
    }
    const json& r = doc["ranges"];
    std::string rpath = path + ".ranges";
    if (!r.is_array()) {
        fail(rpath, "expected an array of [lo, hi] pairs");
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::string ipath = rpath + "[" + std::to_string(i) + "]";
        if (!r[i].is_array() || r[i].size() != 2) {
            fail(ipath, "expected a [lo, hi] pair");
        }
        out.emplace_back(get_number(r[i][0], ipath + "[0]"), get_number(r[i][1], ipath + "[1]"));
    }
    return out;
}

}  // namespace

StateFamily load_model(const std::string& path) {
    json doc = parse_document(path);
    const std::string root = path + ": model";
    if (!doc.is_object()) {
        fail(root, "expected a JSON object");
    }

    std::string kind = get_string(need(doc, "kind", root), root + ".kind");
    long dim = get_integer(need(doc, "dim", root), root + ".dim");
    long nparams = get_integer(need(doc, "nparams", root), root + ".nparams");
    if (dim < 1 || dim > kMaxDim) {
        fail(root + ".dim", "dimension must be between 1 and " + std::to_string(kMaxDim));
    }
    if (nparams < 1) {
        fail(root + ".nparams", "parameter count must be positive");
    }
    DerivSpec deriv = deriv_at(doc, root);
    auto ranges = ranges_at(doc, root);

    try {
        if (kind == "unitary") {
            CMatrix g = cmatrix_at(need(doc, "generator", root), root + ".generator");
            CMatrix rho0 = cmatrix_at(need(doc, "rho0", root), root + ".rho0");
            if (g.rows() != dim) {
                fail(root + ".generator", "size does not match 'dim'");
            }
            if (nparams != 1) {
                fail(root + ".nparams", "unitary families have exactly one parameter");
            }
            return StateFamily::unitary(std::move(g), std::move(rho0), deriv, std::move(ranges));
        }
        if (kind == "kraus") {
            const json& ops = need(doc, "operators", root);
            if (!ops.is_array() || ops.empty()) {
                fail(root + ".operators", "expected a non-empty array of matrices");
            }
            std::vector<ExprMatrix> kraus;
            for (std::size_t k = 0; k < ops.size(); ++k) {
                kraus.push_back(
                    expr_matrix_at(ops[k], root + ".operators[" + std::to_string(k) + "]"));
            }
            CMatrix rho0 = cmatrix_at(need(doc, "rho0", root), root + ".rho0");
            return StateFamily::kraus(static_cast<int>(dim), static_cast<int>(nparams),
                                      std::move(kraus), std::move(rho0), deriv, std::move(ranges));
        }
        if (kind == "mixture") {
            const json& states = need(doc, "states", root);
            if (!states.is_array() || states.empty()) {
                fail(root + ".states", "expected a non-empty array of matrices");
            }
            std::vector<CMatrix> parts;
            for (std::size_t k = 0; k < states.size(); ++k) {
                parts.push_back(
                    cmatrix_at(states[k], root + ".states[" + std::to_string(k) + "]"));
            }
            const json& weights = need(doc, "weights", root);
            if (!weights.is_array()) {
                fail(root + ".weights", "expected an array of expressions");
            }
            std::vector<Expr> ws;
            for (std::size_t k = 0; k < weights.size(); ++k) {
                ws.push_back(expr_at(weights[k], root + ".weights[" + std::to_string(k) + "]"));
            }
            return StateFamily::mixture(static_cast<int>(nparams), std::move(parts), std::move(ws),
                                        deriv, std::move(ranges));
        }
        if (kind == "pure_path") {
            const json& amps = need(doc, "amplitudes", root);
            if (!amps.is_array() || static_cast<long>(amps.size()) != dim) {
                fail(root + ".amplitudes", "expected an array of 'dim' amplitudes");
            }
            ExprVector vec;
            for (std::size_t k = 0; k < amps.size(); ++k) {
                vec.push_back(entry_at(amps[k], root + ".amplitudes[" + std::to_string(k) + "]"));
            }
            return StateFamily::pure_path(static_cast<int>(nparams), std::move(vec), deriv,
                                          std::move(ranges));
        }
        if (kind == "diagonal") {
            const json& probs = need(doc, "probs", root);
            if (!probs.is_array() || static_cast<long>(probs.size()) != dim) {
                fail(root + ".probs", "expected an array of 'dim' probability expressions");
            }
            std::vector<Expr> ps;
            for (std::size_t k = 0; k < probs.size(); ++k) {
                ps.push_back(expr_at(probs[k], root + ".probs[" + std::to_string(k) + "]"));
            }
            return StateFamily::diagonal(static_cast<int>(nparams), std::move(ps), deriv,
                                         std::move(ranges));
        }
        if (kind == "expression") {
            ExprMatrix entries = expr_matrix_at(need(doc, "entries", root), root + ".entries");
            if (static_cast<long>(entries.size()) != dim) {
                fail(root + ".entries", "size does not match 'dim'");
            }
            return StateFamily::expression(static_cast<int>(dim), static_cast<int>(nparams),
                                           std::move(entries), deriv, std::move(ranges));
        }
    } catch (const ValidationError& e) {
        // factory-level complaints get the file name prepended
        std::string msg = e.what();
        if (msg.rfind(path, 0) == 0) {
            throw;
        }
        fail(root, msg);
    }
    fail(root + ".kind",
         "unknown kind '" + kind +
             "' (expected unitary, kraus, mixture, pure_path, diagonal, or expression)");
}

POVM load_povm(const std::string& path) {
    json doc = parse_document(path);
    const std::string root = path + ": povm";
    const json& elements = need(doc, "elements", root);
    if (!elements.is_array() || elements.empty()) {
        fail(root + ".elements", "expected a non-empty array of matrices");
    }
    std::vector<CMatrix> mats;
    for (std::size_t k = 0; k < elements.size(); ++k) {
        mats.push_back(cmatrix_at(elements[k], root + ".elements[" + std::to_string(k) + "]"));
    }
    std::vector<std::string> labels;
    if (doc.contains("labels")) {
        const json& ls = doc["labels"];
        if (!ls.is_array()) {
            fail(root + ".labels", "expected an array of strings");
        }
        for (std::size_t k = 0; k < ls.size(); ++k) {
            labels.push_back(get_string(ls[k], root + ".labels[" + std::to_string(k) + "]"));
        }
    }
    try {
        return POVM::create(std::move(mats), std::move(labels));
    } catch (const ValidationError& e) {
        fail(root, e.what());
    }
}

Prior load_prior(const std::string& path) {
    json doc = parse_document(path);
    const std::string root = path + ": prior";
    Expr density = expr_at(need(doc, "density", root), root + ".density");
    const json& interval = need(doc, "interval", root);
    if (!interval.is_array() || interval.size() != 2) {
        fail(root + ".interval", "expected a [lo, hi] pair");
    }
    double lo = get_number(interval[0], root + ".interval[0]");
    double hi = get_number(interval[1], root + ".interval[1]");
    try {
        return Prior(std::move(density), lo, hi);
    } catch (const ValidationError& e) {
        fail(root, e.what());
    }
}

std::string file_digest(const std::string& path) {
    std::string bytes = read_file(path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace qest
