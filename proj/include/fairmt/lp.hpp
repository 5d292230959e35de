#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace fairmt {

enum class RowSense { less_equal, equal, greater_equal };

/// maximize c^T x  subject to  rows,  x >= 0.
struct LinearProgram {
    struct Row {
        std::vector<std::pair<std::size_t, double>> terms;
        RowSense sense = RowSense::less_equal;
        double rhs = 0.0;
    };

    std::size_t n_vars = 0;
    std::vector<double> objective;
    std::vector<Row> rows;

    explicit LinearProgram(std::size_t n = 0) : n_vars(n), objective(n, 0.0) {}

    std::size_t add_row(std::vector<std::pair<std::size_t, double>> terms, RowSense sense, double rhs);

    double row_activity(std::size_t r, const std::vector<double>& x) const;
    /// Largest bound or row violation of x (0 for a feasible point).
    double max_violation(const std::vector<double>& x) const;
    double objective_value(const std::vector<double>& x) const;
};

enum class LpStatus { optimal, infeasible, unbounded_guard, iteration_limit };

const char* to_string(LpStatus status);

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    std::size_t iterations = 0;
};

/// Solver abstraction so the planner can run on another backend.
class LpBackend {
public:
    virtual ~LpBackend() = default;
    virtual LpResult solve(const LinearProgram& lp) const = 0;
};

/// Two-phase dense tableau simplex. The entering column is the lowest index
/// with a positive reduced cost; the leaving row is chosen by a two-pass
/// ratio test (largest pivot among near-ties), dropping to the lowest-index
/// rule after a run of flat pivots (skipping tied rows whose pivot is below
/// 1e-3 of the largest tied one). No randomness, so the pivot
/// sequence and the returned vertex are a deterministic function of the input.
class DenseSimplex final : public LpBackend {
public:
    struct Options {
        double pivot_tol = 1e-7;
        double optimality_tol = 1e-9;  // relative to the largest |objective| coefficient
        double feasibility_tol = 1e-9;
        std::size_t iteration_factor = 50;  // cap = factor * (rows + cols)
    };

    DenseSimplex() = default;
    explicit DenseSimplex(Options opts) : opts_(opts) {}

    LpResult solve(const LinearProgram& lp) const override;

private:
    Options opts_;
};

/// Writes the LP in fixed-column MPS (with an OBJSENSE MAX section).
/// Rows are named R0000001.., columns X0000001.., the objective row COST.
void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name = "FAIRLP");

}  // namespace fairmt
