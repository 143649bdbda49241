#include "qflp/milp.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qflp::milp {

int MilpModel::add_continuous(const std::string& name, double lb, double ub) {
    vars.push_back({name, lb, ub, false});
    return static_cast<int>(vars.size()) - 1;
}

int MilpModel::add_binary(const std::string& name) {
    vars.push_back({name, 0.0, 1.0, true});
    return static_cast<int>(vars.size()) - 1;
}

int MilpModel::add_integer(const std::string& name, double lb, double ub) {
    vars.push_back({name, lb, ub, true});
    return static_cast<int>(vars.size()) - 1;
}

void MilpModel::add_constraint(const std::string& name, std::vector<LinTerm> terms, Sense sense,
                               double rhs) {
    constraints.push_back({name, std::move(terms), sense, rhs});
}

void MilpModel::add_sos(int type, std::vector<int> members) {
    if (type != 1 && type != 2) throw std::logic_error("SOS type must be 1 or 2");
    sos.push_back({type, std::move(members)});
}

void MilpModel::check() const {
    const int n = static_cast<int>(vars.size());
    auto require = [&](int v, const std::string& where) {
        if (v < 0 || v >= n) throw std::logic_error("unknown variable index in " + where);
    };
    for (const auto& c : constraints)
        for (const auto& t : c.terms) require(t.var, "constraint " + c.name);
    for (const auto& g : sos)
        for (int v : g.vars) require(v, "sos group");
    for (const auto& t : objective) require(t.var, "objective");
}

std::string MilpModel::to_lp_format() const {
    std::ostringstream out;
    out.precision(17);
    auto terms = [&](const std::vector<LinTerm>& ts) {
        bool first = true;
        for (const auto& t : ts) {
            if (t.coef >= 0 && !first) out << " + ";
            if (t.coef < 0) out << (first ? "- " : " - ");
            out << std::abs(t.coef) << ' ' << vars[t.var].name;
            first = false;
        }
        if (first) out << "0 " << (vars.empty() ? "x" : vars[0].name);
    };
    out << "Minimize\n obj: ";
    terms(objective);
    out << "\nSubject To\n";
    for (const auto& c : constraints) {
        out << ' ' << c.name << ": ";
        terms(c.terms);
        out << (c.sense == Sense::LE ? " <= " : c.sense == Sense::GE ? " >= " : " = ") << c.rhs << '\n';
    }
    out << "Bounds\n";
    for (const auto& v : vars) {
        if (v.lb == -std::numeric_limits<double>::infinity())
            out << ' ' << v.name << " >= -inf\n";
        out << ' ' << v.lb << " <= " << v.name << " <= " << v.ub << '\n';
    }
    bool any_int = false;
    for (const auto& v : vars) any_int |= v.integral;
    if (any_int) {
        out << "General\n";
        for (const auto& v : vars)
            if (v.integral) out << ' ' << v.name << '\n';
    }
    if (!sos.empty()) {
        out << "SOS\n";
        for (std::size_t g = 0; g < sos.size(); ++g) {
            out << " s" << g << ": S" << sos[g].type << " ::";
            for (std::size_t i = 0; i < sos[g].vars.size(); ++i)
                out << ' ' << vars[sos[g].vars[i]].name << ':' << (i + 1);
            out << '\n';
        }
    }
    out << "End\n";
    return out.str();
}

namespace {

constexpr const char* kBridgeScript = R"PY(
import json
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

with open(sys.argv[1]) as fh:
    m = json.load(fh)

n = len(m["lb"])
c = np.asarray(m["c"], dtype=float)
integrality = np.asarray(m["integrality"], dtype=int)
lb = np.asarray([-np.inf if v is None else v for v in m["lb"]], dtype=float)
ub = np.asarray([np.inf if v is None else v for v in m["ub"]], dtype=float)
bounds = Bounds(lb, ub)
n_rows = len(m["cl"])
constraints = []
if n_rows:
    A = sparse.csr_matrix(
        (m["vals"], (m["rows"], m["cols"])), shape=(n_rows, n)
    )
    # one-sided rows arrive as null (JSON has no infinity)
    cl = np.asarray([-np.inf if v is None else v for v in m["cl"]], dtype=float)
    cu = np.asarray([np.inf if v is None else v for v in m["cu"]], dtype=float)
    constraints.append(LinearConstraint(A, cl, cu))

res = milp(
    c=c,
    constraints=constraints,
    integrality=integrality,
    bounds=bounds,
    options={"time_limit": m["time_limit"], "mip_rel_gap": m["mip_gap"]},
)

out = {"status": int(res.status), "message": str(res.message)}
if res.x is not None:
    out["x"] = [float(v) for v in res.x]
    out["fun"] = float(res.fun)
    gap = getattr(res, "mip_gap", None)
    out["gap"] = float(gap) if gap is not None else 0.0
with open(sys.argv[2], "w") as fh:
    json.dump(out, fh)
)PY";

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        for (int attempt = 0; attempt < 100; ++attempt) {
            auto cand = base / ("qflp-milp-" + std::to_string(std::rand()) + "-" + std::to_string(attempt));
            std::error_code ec;
            if (std::filesystem::create_directory(cand, ec)) {
                path = cand;
                return;
            }
        }
        throw std::runtime_error("cannot create solver scratch directory");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

}  // namespace

SolveResult ScipySolver::solve(const MilpModel& model, const SolveOptions& opts) {
    model.check();
    if (!model.sos.empty())
        throw std::logic_error("scipy backend has no SOS support; lower SOS groups first");

    nlohmann::json req;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> c(model.vars.size(), 0.0), lb, ub;
    std::vector<int> integrality;
    for (const auto& v : model.vars) {
        lb.push_back(v.lb);
        ub.push_back(v.ub);
        integrality.push_back(v.integral ? 1 : 0);
    }
    for (const auto& t : model.objective) c[t.var] += t.coef;
    std::vector<int> rows, cols;
    std::vector<double> vals, cl, cu;
    for (std::size_t r = 0; r < model.constraints.size(); ++r) {
        const auto& con = model.constraints[r];
        for (const auto& t : con.terms) {
            rows.push_back(static_cast<int>(r));
            cols.push_back(t.var);
            vals.push_back(t.coef);
        }
        cl.push_back(con.sense == Sense::LE ? -inf : con.rhs);
        cu.push_back(con.sense == Sense::GE ? inf : con.rhs);
    }
    req["c"] = c;
    req["lb"] = lb;
    req["ub"] = ub;
    req["integrality"] = integrality;
    req["rows"] = rows;
    req["cols"] = cols;
    req["vals"] = vals;
    req["cl"] = cl;
    req["cu"] = cu;
    req["time_limit"] = opts.time_limit_s;
    req["mip_gap"] = opts.mip_gap;

    TempDir dir;
    const auto script = dir.path / "bridge.py";
    const auto in_path = dir.path / "model.json";
    const auto out_path = dir.path / "solution.json";
    const auto log_path = dir.path / "log.txt";
    write_text(script, kBridgeScript);
    write_text(in_path, req.dump());

    const std::string cmd = "python3 '" + script.string() + "' '" + in_path.string() + "' '" +
                            out_path.string() + "' > '" + log_path.string() + "' 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0 || !std::filesystem::exists(out_path)) {
        std::ifstream log(log_path);
        std::stringstream ss;
        ss << log.rdbuf();
        throw std::runtime_error("milp bridge failed (rc=" + std::to_string(rc) + "): " + ss.str());
    }
    std::ifstream out_file(out_path);
    nlohmann::json resp = nlohmann::json::parse(out_file);

    const int status = resp.at("status").get<int>();
    SolveResult result;
    if (status == 2) {
        result.status = SolveStatus::Infeasible;
        return result;
    }
    if (!resp.contains("x"))
        throw std::runtime_error("solver returned no incumbent: " + resp.value("message", ""));
    result.values = resp.at("x").get<std::vector<double>>();
    result.objective = resp.at("fun").get<double>() + model.objective_constant;
    result.gap = resp.value("gap", 0.0);
    if (status == 0)
        result.status = result.gap > opts.mip_gap * 10.0 ? SolveStatus::FeasibleWithGap : SolveStatus::Optimal;
    else if (status == 1)
        result.status = SolveStatus::FeasibleWithGap;  // hit the time limit with an incumbent
    else
        throw std::runtime_error("solver status " + std::to_string(status) + ": " +
                                 resp.value("message", ""));
    return result;
}

std::unique_ptr<SolverAdapter> make_solver() {
    const char* backend = std::getenv("QFLP_SOLVER");
    const std::string name = backend ? backend : "scipy";
    if (name == "scipy") return std::make_unique<ScipySolver>();
    throw std::invalid_argument("unknown solver backend: " + name);
}

}  // namespace qflp::milp
