#pragma once

// JSON and CSV formats: matrices, parameter files, reports and solutions.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "affinehs/errors.hpp"
#include "affinehs/params.hpp"
#include "affinehs/pdmpsim.hpp"
#include "affinehs/riccati.hpp"
#include "affinehs/symcone.hpp"

namespace affinehs::io {

using json = nlohmann::ordered_json;

/// Thrown for unreadable JSON; carries the 1-based line and column.
class ParseError : public InputError {
public:
    ParseError(const std::string& what, int line, int column)
        : InputError(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

inline json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1, col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string msg = e.what();
        if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
        throw ParseError("malformed JSON: " + msg, line, col);
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << content;
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// Dense matrix from an array of equal-length rows.
inline Matrix matrix_from_json(const json& j, const std::string& where) {
    if (j.is_number()) {
        Matrix m(1, 1);
        m(0, 0) = j.get<double>();
        return m;
    }
    const json& rows = j.is_object() && j.contains("rows") ? j.at("rows") : j;
    if (!rows.is_array() || rows.empty()) throw InputError(where + ": expected a non-empty array of rows");
    const auto r = static_cast<Eigen::Index>(rows.size());
    Eigen::Index c = -1;
    Matrix m;
    for (Eigen::Index i = 0; i < r; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array()) throw InputError(where + ": row " + std::to_string(i) + " is not an array");
        if (c < 0) {
            c = static_cast<Eigen::Index>(row.size());
            m.resize(r, c);
        }
        if (static_cast<Eigen::Index>(row.size()) != c) throw InputError(where + ": ragged rows");
        for (Eigen::Index k = 0; k < c; ++k) {
            const json& v = row[static_cast<std::size_t>(k)];
            if (!v.is_number()) throw InputError(where + ": entry (" + std::to_string(i) + "," + std::to_string(k) + ") is not a number");
            m(i, k) = v.get<double>();
        }
    }
    if (j.is_object() && j.contains("dim") && j.at("dim").get<int>() != r)
        throw InputError(where + ": \"dim\" does not match the number of rows");
    return m;
}

/// Symmetric matrix; asymmetry beyond 1e-12 relative is rejected.
inline SymMatrix sym_from_json(const json& j, const std::string& where, int dim = 0) {
    const Matrix m = matrix_from_json(j, where);
    if (m.rows() != m.cols()) throw InputError(where + ": matrix must be square");
    if (dim > 0 && m.rows() != dim)
        throw InputError(where + ": expected dimension " + std::to_string(dim) + ", got " + std::to_string(m.rows()));
    try {
        return SymMatrix::from_symmetric(m);
    } catch (const InputError& e) {
        throw InputError(where + ": " + e.what());
    }
}

inline json matrix_rows(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

inline json to_json(const SymMatrix& a) { return json{{"dim", a.dim()}, {"rows", matrix_rows(a.matrix())}}; }

// ---------------------------------------------------------------------------
// Parameter files
// ---------------------------------------------------------------------------

inline double number_or_inf(const json& j, const std::string& where) {
    if (j.is_null()) return kInf;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "Infinity" || s == "+inf") return kInf;
        throw InputError(where + ": expected a number or \"inf\"");
    }
    if (!j.is_number()) throw InputError(where + ": expected a number");
    return j.get<double>();
}

inline RadialDensity density_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("type")) throw InputError(where + ": density needs a \"type\"");
    const auto type = j.at("type").get<std::string>();
    const double c = j.value("c", 1.0);
    const double rmin = j.contains("rmin") ? number_or_inf(j.at("rmin"), where + ".rmin") : 0.0;
    if (type == "power") {
        if (!j.contains("alpha")) throw InputError(where + ": power density needs \"alpha\"");
        const double rmax = j.contains("rmax") ? number_or_inf(j.at("rmax"), where + ".rmax") : 1.0;
        return RadialDensity::power(c, j.at("alpha").get<double>(), rmin, rmax);
    }
    if (type == "exponential") {
        if (!j.contains("lambda")) throw InputError(where + ": exponential density needs \"lambda\"");
        const double rmax = j.contains("rmax") ? number_or_inf(j.at("rmax"), where + ".rmax") : kInf;
        return RadialDensity::exponential(c, j.at("lambda").get<double>(), rmin, rmax);
    }
    throw InputError(where + ": unknown density type '" + type + "'");
}

inline json to_json(const RadialDensity& h) {
    json j;
    if (h.family() == RadialDensity::Family::power) {
        j["type"] = "power";
        j["alpha"] = h.shape();
    } else {
        j["type"] = "exponential";
        j["lambda"] = h.shape();
    }
    j["c"] = h.scale();
    j["rmin"] = h.rmin();
    j["rmax"] = std::isinf(h.rmax()) ? json("inf") : json(h.rmax());
    return j;
}

inline ScalarJumpMeasure scalar_measure_from_json(const json& j, int d) {
    ScalarJumpMeasure m;
    if (j.is_null()) return m;
    if (!j.is_object()) throw InputError("m: expected an object");
    if (j.contains("atoms"))
        for (std::size_t i = 0; i < j.at("atoms").size(); ++i) {
            const json& a = j.at("atoms")[i];
            const std::string where = "m.atoms[" + std::to_string(i) + "]";
            if (!a.contains("xi") || !a.contains("w")) throw InputError(where + ": needs \"xi\" and \"w\"");
            m.atoms.push_back({sym_from_json(a.at("xi"), where + ".xi", d), a.at("w").get<double>()});
        }
    if (j.contains("rays"))
        for (std::size_t i = 0; i < j.at("rays").size(); ++i) {
            const json& r = j.at("rays")[i];
            const std::string where = "m.rays[" + std::to_string(i) + "]";
            if (!r.contains("D") || !r.contains("density")) throw InputError(where + ": needs \"D\" and \"density\"");
            m.rays.push_back({sym_from_json(r.at("D"), where + ".D", d), density_from_json(r.at("density"), where + ".density")});
        }
    return m;
}

inline OperatorJumpMeasure operator_measure_from_json(const json& j, int d) {
    OperatorJumpMeasure mu;
    if (j.is_null()) return mu;
    if (!j.is_object()) throw InputError("mu: expected an object");
    if (j.contains("atoms"))
        for (std::size_t i = 0; i < j.at("atoms").size(); ++i) {
            const json& a = j.at("atoms")[i];
            const std::string where = "mu.atoms[" + std::to_string(i) + "]";
            if (!a.contains("xi") || !a.contains("M")) throw InputError(where + ": needs \"xi\" and \"M\"");
            mu.atoms.push_back({sym_from_json(a.at("xi"), where + ".xi", d), sym_from_json(a.at("M"), where + ".M", d)});
        }
    if (j.contains("rays"))
        for (std::size_t i = 0; i < j.at("rays").size(); ++i) {
            const json& r = j.at("rays")[i];
            const std::string where = "mu.rays[" + std::to_string(i) + "]";
            if (!r.contains("D") || !r.contains("M") || !r.contains("density"))
                throw InputError(where + ": needs \"D\", \"M\" and \"density\"");
            mu.rays.push_back({sym_from_json(r.at("D"), where + ".D", d), sym_from_json(r.at("M"), where + ".M", d),
                               density_from_json(r.at("density"), where + ".density")});
        }
    return mu;
}

/**
 * Parameter set from its JSON object. "b_extra" may replace "b", in which case
 * b = b_extra + I_m; "B.compensate_mu" adds the small-jump compensator of μ.
 */
inline ParameterSet params_from_json(const json& j) {
    try {
        if (!j.is_object()) throw InputError("parameter file: expected a JSON object");
        if (!j.contains("dim") || !j.at("dim").is_number_integer()) throw InputError("parameter file: integer \"dim\" required");
        const int d = j.at("dim").get<int>();
        if (d <= 0) throw InputError("parameter file: dim must be positive");
        ParameterSet p;
        p.dim = d;
        p.m = scalar_measure_from_json(j.value("m", json()), d);
        p.mu = operator_measure_from_json(j.value("mu", json()), d);
        if (j.contains("b")) {
            p.b = sym_from_json(j.at("b"), "b", d);
        } else if (j.contains("b_extra")) {
            p.b = sym_from_json(j.at("b_extra"), "b_extra", d) + small_jump_mean(p.m, d);
        } else {
            throw InputError("parameter file: \"b\" or \"b_extra\" required");
        }
        p.B = SuperOperator(d);
        if (j.contains("B")) {
            const json& B = j.at("B");
            if (!B.is_object()) throw InputError("B: expected an object");
            if (B.contains("lyapunov")) {
                const Matrix beta = matrix_from_json(B.at("lyapunov"), "B.lyapunov");
                if (beta.rows() != d || beta.cols() != d) throw InputError("B.lyapunov: must be dim x dim");
                p.B += SuperOperator::lyapunov(beta);
            }
            if (B.contains("conjugations"))
                for (std::size_t i = 0; i < B.at("conjugations").size(); ++i) {
                    const std::string where = "B.conjugations[" + std::to_string(i) + "]";
                    const Matrix g = matrix_from_json(B.at("conjugations")[i], where);
                    if (g.rows() != d || g.cols() != d) throw InputError(where + ": must be dim x dim");
                    p.B += SuperOperator::conjugation(g);
                }
            if (B.contains("dense") && !B.at("dense").is_null())
                p.B += SuperOperator::dense(matrix_from_json(B.at("dense"), "B.dense"), d);
            if (B.value("compensate_mu", false)) p.B += compensator(p.mu, d);
        }
        check_structure(p);
        return p;
    } catch (const json::exception& e) {
        throw InputError(std::string("parameter file: ") + e.what());
    }
}

inline ParameterSet read_params(const std::string& path) { return params_from_json(parse_json(read_file(path))); }

/// Writes B as its Lyapunov and conjugation parts plus a dense remainder.
inline json to_json(const SuperOperator& B) {
    const int d = B.dim();
    Matrix beta = Matrix::Zero(d, d);
    bool has_beta = false;
    json conj = json::array();
    SuperOperator rest(d);
    for (const auto& wt : B.terms()) {
        if (const auto* l = std::get_if<SuperOperator::Lyapunov>(&wt.term)) {
            beta += wt.coeff * l->beta;
            has_beta = true;
        } else if (const auto* c = std::get_if<SuperOperator::Conjugation>(&wt.term); c && wt.coeff >= 0) {
            conj.push_back(matrix_rows(std::sqrt(wt.coeff) * c->g));
        } else {
            rest += SuperOperator::from_term(d, wt);
        }
    }
    json j;
    if (has_beta) j["lyapunov"] = matrix_rows(beta);
    if (!conj.empty()) j["conjugations"] = conj;
    if (!rest.empty()) j["dense"] = matrix_rows(rest.coordinates());
    j["compensate_mu"] = false;
    return j;
}

inline json to_json(const ParameterSet& p) {
    json j;
    j["dim"] = p.dim;
    j["b"] = matrix_rows(p.b.matrix());
    j["B"] = to_json(p.B);
    json m = json::object();
    json atoms = json::array();
    for (const auto& a : p.m.atoms) atoms.push_back({{"xi", matrix_rows(a.xi.matrix())}, {"w", a.weight}});
    json rays = json::array();
    for (const auto& r : p.m.rays) rays.push_back({{"D", matrix_rows(r.direction.matrix())}, {"density", to_json(r.density)}});
    m["atoms"] = atoms;
    m["rays"] = rays;
    j["m"] = m;
    json mu = json::object();
    atoms = json::array();
    for (const auto& a : p.mu.atoms)
        atoms.push_back({{"xi", matrix_rows(a.xi.matrix())}, {"M", matrix_rows(a.mass.matrix())}});
    rays = json::array();
    for (const auto& r : p.mu.rays)
        rays.push_back({{"D", matrix_rows(r.direction.matrix())},
                        {"M", matrix_rows(r.weight.matrix())},
                        {"density", to_json(r.kernel)}});
    mu["atoms"] = atoms;
    mu["rays"] = rays;
    j["mu"] = mu;
    return j;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Finite doubles as numbers; ±inf and NaN as strings (JSON has no literal for them).
inline json num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

inline json to_json(const AdmissibilityReport& r) {
    json j;
    j["all_pass"] = r.all_pass();
    j["tol"] = r.tol;
    j["n_pairs"] = r.n_pairs;
    j["seed"] = r.seed;
    j["pairs_checked"] = r.pairs_checked;
    json conds = json::array();
    for (const auto& c : r.conditions) {
        json cj{{"id", c.id}, {"description", c.description}, {"pass", c.pass}, {"violation", num(c.violation)}};
        if (c.witness_u) cj["witness_u"] = to_json(*c.witness_u);
        if (c.witness_x) cj["witness_x"] = to_json(*c.witness_x);
        if (!c.detail.empty()) cj["detail"] = c.detail;
        conds.push_back(cj);
    }
    j["conditions"] = conds;
    return j;
}

inline json to_json(const RiccatiDiagnostics& d) {
    return json{{"accepted_steps", d.accepted_steps},   {"rejected_steps", d.rejected_steps},
                {"cone_rejections", d.cone_rejections}, {"max_cone_violation", d.max_cone_violation},
                {"clip_total", d.clip_total},           {"clip_events", d.clip_events}};
}

inline json to_json(const CascadeDiagnostics& c) {
    json levels = json::array();
    for (const auto& l : c.levels)
        levels.push_back({{"k", l.k},
                          {"residual", num(l.residual)},
                          {"min_monotone_eig", num(l.min_monotone_eig)},
                          {"accepted_steps", l.accepted_steps}});
    json j{{"levels", levels}, {"residual", num(c.residual)}};
    if (c.min_limit_gap) j["min_limit_gap"] = num(*c.min_limit_gap);
    return j;
}

/// Decimal form with max_digits10 significant digits, so values round-trip.
inline std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream ss;
    ss << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
    return ss.str();
}

inline std::string upper_triangle_header(const std::string& prefix, int d) {
    std::string h;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) h += "," + prefix + "_" + std::to_string(i + 1) + std::to_string(j + 1);
    return h;
}

inline std::string upper_triangle(const SymMatrix& a) {
    std::string s;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = i; j < a.dim(); ++j) s += "," + fmt(a(i, j));
    return s;
}

/// t, phi, psi_ij (upper triangle), min_eig, step_size
inline std::string solution_csv(const RiccatiSolution& sol) {
    const int d = sol.points.front().psi.dim();
    std::string out = "t,phi" + upper_triangle_header("psi", d) + ",min_eig,step_size\n";
    for (const auto& p : sol.points)
        out += fmt(p.t) + "," + fmt(p.phi) + upper_triangle(p.psi) + "," + fmt(p.min_eig) + "," + fmt(p.step) + "\n";
    return out;
}

/// path_id, event_index, time, event_type, state upper triangle
inline std::string paths_csv_header(int d) { return "path_id,event_index,time,event_type" + upper_triangle_header("x", d) + "\n"; }

inline std::string paths_csv_rows(long path_id, const SimPath& path) {
    std::string out;
    for (std::size_t i = 0; i < path.events.size(); ++i) {
        const auto& e = path.events[i];
        out += std::to_string(path_id) + "," + std::to_string(i) + "," + fmt(e.time) + "," +
               (e.type == EventType::jump ? "jump" : "flow-sample") + upper_triangle(e.state) + "\n";
    }
    return out;
}

} // namespace affinehs::io
