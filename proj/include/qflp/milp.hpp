#pragma once

#include <memory>
#include <string>
#include <vector>

// Solver-independent MILP container plus the solver-adapter contract.
namespace qflp::milp {

enum class Sense { LE, EQ, GE };

struct Variable {
    std::string name;
    double lb = 0.0;
    double ub = 0.0;
    bool integral = false;
};

struct LinTerm {
    int var = -1;
    double coef = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<LinTerm> terms;
    Sense sense = Sense::LE;
    double rhs = 0.0;
};

// Ordered special-ordered set: type 1 (at most one nonzero) or type 2
// (at most two, adjacent in the given order).
struct SosGroup {
    int type = 1;
    std::vector<int> vars;
};

struct MilpModel {
    std::vector<Variable> vars;
    std::vector<Constraint> constraints;
    std::vector<SosGroup> sos;
    std::vector<LinTerm> objective;  // minimize
    double objective_constant = 0.0;

    int add_continuous(const std::string& name, double lb, double ub);
    int add_binary(const std::string& name);
    int add_integer(const std::string& name, double lb, double ub);
    void add_constraint(const std::string& name, std::vector<LinTerm> terms, Sense sense, double rhs);
    void add_sos(int type, std::vector<int> vars);

    // Every referenced variable exists; throws std::logic_error otherwise.
    void check() const;

    // CPLEX LP-format text for debugging with external tools.
    std::string to_lp_format() const;
};

enum class SolveStatus { Optimal, FeasibleWithGap, Infeasible };

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> values;  // per variable, empty when infeasible
    double objective = 0.0;      // includes the model constant
    double gap = 0.0;            // proven relative MIP gap
};

struct SolveOptions {
    double time_limit_s = 120.0;
    double mip_gap = 1e-6;
};

class SolverAdapter {
  public:
    virtual ~SolverAdapter() = default;
    virtual bool supports_sos1() const = 0;
    virtual bool supports_sos2() const = 0;
    virtual SolveResult solve(const MilpModel& model, const SolveOptions& opts) = 0;
};

// HiGHS through scipy.optimize.milp in a python subprocess; no native SOS
// support (callers lower SOS groups to binaries first).
class ScipySolver : public SolverAdapter {
  public:
    bool supports_sos1() const override { return false; }
    bool supports_sos2() const override { return false; }
    SolveResult solve(const MilpModel& model, const SolveOptions& opts) override;
};

// Backend selected by the QFLP_SOLVER environment variable ("scipy" is the
// default and currently the only backend).
std::unique_ptr<SolverAdapter> make_solver();

}  // namespace qflp::milp
