#include "fairmt/lp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fairmt {

std::size_t LinearProgram::add_row(std::vector<std::pair<std::size_t, double>> terms, RowSense sense, double rhs) {
    for (const auto& [j, v] : terms)
        if (j >= n_vars) throw std::out_of_range("LP row references an unknown variable");
    rows.push_back({std::move(terms), sense, rhs});
    return rows.size() - 1;
}

double LinearProgram::row_activity(std::size_t r, const std::vector<double>& x) const {
    double acc = 0.0;
    for (const auto& [j, v] : rows[r].terms) acc += v * x[j];
    return acc;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (double v : x) worst = std::max(worst, -v);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double lhs = row_activity(r, x);
        const double rhs = rows[r].rhs;
        switch (rows[r].sense) {
            case RowSense::less_equal: worst = std::max(worst, lhs - rhs); break;
            case RowSense::greater_equal: worst = std::max(worst, rhs - lhs); break;
            case RowSense::equal: worst = std::max(worst, std::abs(lhs - rhs)); break;
        }
    }
    return worst;
}

double LinearProgram::objective_value(const std::vector<double>& x) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < n_vars; ++j) acc += objective[j] * x[j];
    return acc;
}

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded_guard: return "unbounded_guard";
        case LpStatus::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

namespace {

constexpr double kDropTol = 1e-13;
// Pivots between two refactorizations when nothing else forces one.
constexpr std::size_t kRefactorInterval = 1000;

// Row-major tableau with the right-hand side stored as the last column and a
// separate reduced-cost row d_j = c_j - c_B B^-1 A_j. The original rows are
// kept so that B^-1 [A | b] can be rebuilt when round-off piles up.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : m_(rows), n_(cols), stride_(cols + 1), data_(rows * (cols + 1), 0.0), cost_(cols + 1, 0.0),
          basis_(rows, 0), enterable_(cols, 1), original_(rows) {}

    double* row(std::size_t i) { return data_.data() + i * stride_; }
    const double* row(std::size_t i) const { return data_.data() + i * stride_; }
    double& rhs(std::size_t i) { return data_[i * stride_ + n_]; }
    double rhs(std::size_t i) const { return data_[i * stride_ + n_]; }
    std::vector<double>& cost() { return cost_; }
    std::vector<std::size_t>& basis() { return basis_; }
    const std::vector<std::size_t>& basis() const { return basis_; }
    std::vector<char>& enterable() { return enterable_; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

    /// Freezes the current contents as the original system [A | b].
    void snapshot() {
        for (std::size_t i = 0; i < m_; ++i) {
            original_[i].clear();
            const double* r = row(i);
            for (std::size_t j = 0; j < stride_; ++j)
                if (r[j] != 0.0) original_[i].push_back({j, r[j]});
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        double* pr = row(r);
        const double inv = 1.0 / pr[c];
        nz_.clear();
        for (std::size_t j = 0; j < stride_; ++j) {
            if (pr[j] == 0.0) continue;
            pr[j] *= inv;
            if (std::abs(pr[j]) < kDropTol) {
                pr[j] = 0.0;
                continue;
            }
            nz_.push_back(j);
        }
        pr[c] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* pi = row(i);
            const double f = pi[c];
            if (f == 0.0) continue;
            for (std::size_t j : nz_) {
                double v = pi[j] - f * pr[j];
                pi[j] = std::abs(v) < kDropTol ? 0.0 : v;
            }
            pi[c] = 0.0;
        }
        const double f = cost_[c];
        if (f != 0.0) {
            for (std::size_t j : nz_) cost_[j] -= f * pr[j];
            cost_[c] = 0.0;
        }
        basis_[r] = c;
    }

    /// Recomputes reduced costs for objective c over the current basis.
    void price(const std::vector<double>& c) {
        std::fill(cost_.begin(), cost_.end(), 0.0);
        std::copy(c.begin(), c.end(), cost_.begin());
        for (std::size_t i = 0; i < m_; ++i) {
            const double cb = c[basis_[i]];
            if (cb == 0.0) continue;
            const double* pi = row(i);
            for (std::size_t j = 0; j < stride_; ++j)
                if (pi[j] != 0.0) cost_[j] -= cb * pi[j];
        }
        for (std::size_t i = 0; i < m_; ++i) cost_[basis_[i]] = 0.0;
    }

    /// Rebuilds B^-1 [A | b] for the current basis (Gauss-Jordan with partial
    /// pivoting on B) and reprices. False, leaving the tableau untouched, when
    /// B is numerically singular.
    bool refactor(const std::vector<double>& c) {
        const std::size_t m = m_;
        std::vector<std::size_t> pos(n_, m);
        for (std::size_t k = 0; k < m; ++k) pos[basis_[k]] = k;
        // work = [B | I], row-major with 2m columns
        std::vector<double> work(m * 2 * m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            double* w = work.data() + i * 2 * m;
            for (const auto& [j, v] : original_[i])
                if (j < n_ && pos[j] < m) w[pos[j]] = v;
            w[m + i] = 1.0;
        }
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t p = k;
            for (std::size_t i = k + 1; i < m; ++i)
                if (std::abs(work[i * 2 * m + k]) > std::abs(work[p * 2 * m + k])) p = i;
            if (std::abs(work[p * 2 * m + k]) < 1e-11) return false;
            if (p != k)
                std::swap_ranges(work.begin() + p * 2 * m, work.begin() + (p + 1) * 2 * m, work.begin() + k * 2 * m);
            double* wk = work.data() + k * 2 * m;
            const double inv = 1.0 / wk[k];
            for (std::size_t j = k; j < 2 * m; ++j) wk[j] *= inv;
            for (std::size_t i = 0; i < m; ++i) {
                if (i == k) continue;
                double* wi = work.data() + i * 2 * m;
                const double f = wi[k];
                if (f == 0.0) continue;
                for (std::size_t j = k; j < 2 * m; ++j) wi[j] -= f * wk[j];
            }
        }
        std::fill(data_.begin(), data_.end(), 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            double* out = row(k);
            const double* binv = work.data() + k * 2 * m + m;
            for (std::size_t i = 0; i < m; ++i) {
                const double f = binv[i];
                if (f == 0.0) continue;
                for (const auto& [j, v] : original_[i]) out[j] += f * v;
            }
            for (std::size_t j = 0; j < stride_; ++j)
                if (std::abs(out[j]) < kDropTol) out[j] = 0.0;
            for (std::size_t kk = 0; kk < m; ++kk) out[basis_[kk]] = 0.0;
            out[basis_[k]] = 1.0;
        }
        price(c);
        return true;
    }

    /// Largest |A x_B - b| of the current basic solution against the original rows.
    double residual() const {
        std::vector<double> x(n_, 0.0);
        for (std::size_t k = 0; k < m_; ++k) x[basis_[k]] = rhs(k);
        double worst = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            double acc = 0.0;
            for (const auto& [j, v] : original_[i]) acc += j < n_ ? v * x[j] : -v;
            worst = std::max(worst, std::abs(acc));
        }
        return worst;
    }

private:
    std::size_t m_, n_, stride_;
    std::vector<double> data_;
    std::vector<double> cost_;
    std::vector<std::size_t> basis_;
    std::vector<char> enterable_;
    std::vector<std::size_t> nz_;
    std::vector<std::vector<std::pair<std::size_t, double>>> original_;
};

enum class PhaseOutcome { optimal, unbounded, iteration_limit };

struct PhaseControl {
    double opt_tol;
    double pivot_tol;
    double feasibility_tol;
    double residual_tol;
    std::size_t cap;
    std::size_t stall_limit;  // objective-flat pivots before strict Bland takes over
};

// Bland leaving row: smallest ratio, ties to the lowest basic variable index.
// Tied rows whose pivot is far below the largest tied pivot are skipped; on
// long degenerate runs those are all ratio-0 ties and taking them drives the
// basis towards singularity.
std::size_t bland_leave(const Tableau& tab, std::size_t enter, double pivot_tol) {
    constexpr double kRelativePivot = 1e-3;
    const auto& basis = tab.basis();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        const double a = tab.row(i)[enter];
        if (a > pivot_tol) best = std::min(best, std::max(0.0, tab.rhs(i)) / a);
    }
    double largest = 0.0;
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        const double a = tab.row(i)[enter];
        if (a > pivot_tol && std::max(0.0, tab.rhs(i)) / a == best) largest = std::max(largest, a);
    }
    std::size_t leave = tab.rows();
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        const double a = tab.row(i)[enter];
        if (a <= pivot_tol || a < kRelativePivot * largest || std::max(0.0, tab.rhs(i)) / a != best) continue;
        if (leave == tab.rows() || basis[i] < basis[leave]) leave = i;
    }
    return leave;
}

// Two-pass (Harris) leaving row: among rows whose ratio is within the
// feasibility tolerance of the minimum, take the largest pivot element, then
// the lowest basic variable index. Small pivots are what wreck the tableau.
std::size_t harris_leave(const Tableau& tab, std::size_t enter, const PhaseControl& ctl) {
    const auto& basis = tab.basis();
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        const double a = tab.row(i)[enter];
        if (a <= ctl.pivot_tol) continue;
        bound = std::min(bound, (std::max(0.0, tab.rhs(i)) + ctl.feasibility_tol) / a);
    }
    std::size_t leave = tab.rows();
    double best_a = 0.0;
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        const double a = tab.row(i)[enter];
        if (a <= ctl.pivot_tol || std::max(0.0, tab.rhs(i)) / a > bound) continue;
        if (leave == tab.rows() || a > best_a * (1.0 + 1e-12) ||
            (a >= best_a * (1.0 - 1e-12) && basis[i] < basis[leave])) {
            if (a > best_a) best_a = a;
            leave = i;
        }
    }
    return leave;
}

PhaseOutcome run_phase(Tableau& tab, const std::vector<double>& c, const PhaseControl& ctl,
                       std::size_t& iterations) {
    const std::size_t n = tab.cols();
    auto& cost = tab.cost();
    auto& enterable = tab.enterable();
    std::size_t since_refactor = 0;
    std::size_t stalled = 0;
    double last_objective = -cost[n];
    // Refactors unless the tableau is already fresh; false means "nothing to gain".
    auto refresh = [&]() {
        if (since_refactor == 0) return false;
        since_refactor = 0;
        return tab.refactor(c);
    };
    while (true) {
        if (since_refactor >= kRefactorInterval) refresh();

        // Bland: lowest-index column with a positive reduced cost
        std::size_t enter = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (enterable[j] && cost[j] > ctl.opt_tol) {
                enter = j;
                break;
            }
        }
        if (enter == n) {
            if (since_refactor > 0 && tab.residual() > ctl.residual_tol && refresh()) continue;
            return PhaseOutcome::optimal;
        }
        if (iterations >= ctl.cap) return PhaseOutcome::iteration_limit;

        const std::size_t leave = stalled > ctl.stall_limit ? bland_leave(tab, enter, ctl.pivot_tol)
                                                            : harris_leave(tab, enter, ctl);
        if (leave == tab.rows()) {
            if (refresh()) continue;
            return PhaseOutcome::unbounded;
        }
        // A slightly negative basic value on the pivot row would otherwise be
        // divided by a small pivot and pushed into every other row.
        if (tab.rhs(leave) < 0.0) tab.rhs(leave) = 0.0;
        tab.pivot(leave, enter);
        ++iterations;
        ++since_refactor;
        const double objective = -cost[n];
        if (objective > last_objective + 1e-12 * (1.0 + std::abs(last_objective))) {
            stalled = 0;
            last_objective = objective;
        } else {
            ++stalled;
        }
    }
}

}  // namespace

LpResult DenseSimplex::solve(const LinearProgram& lp) const {
    const std::size_t n = lp.n_vars;
    const std::size_t m = lp.rows.size();
    if (lp.objective.size() != n) throw std::invalid_argument("objective size differs from variable count");

    // Normalise to nonnegative right-hand sides and count auxiliary columns.
    std::vector<RowSense> sense(m);
    std::vector<double> sign(m, 1.0);
    std::size_t n_slack = 0, n_art = 0;
    double bmax = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        sense[i] = lp.rows[i].sense;
        bmax = std::max(bmax, std::abs(lp.rows[i].rhs));
        if (lp.rows[i].rhs < 0.0) {
            sign[i] = -1.0;
            if (sense[i] == RowSense::less_equal) sense[i] = RowSense::greater_equal;
            else if (sense[i] == RowSense::greater_equal) sense[i] = RowSense::less_equal;
        }
        if (sense[i] != RowSense::equal) ++n_slack;
        if (sense[i] != RowSense::less_equal) ++n_art;
    }
    const std::size_t cols = n + n_slack + n_art;
    const std::size_t art_begin = n + n_slack;

    Tableau tab(m, cols);
    std::vector<double> phase1(cols, 0.0);
    std::size_t next_slack = n, next_art = art_begin;
    for (std::size_t i = 0; i < m; ++i) {
        double* r = tab.row(i);
        for (const auto& [j, v] : lp.rows[i].terms) r[j] += sign[i] * v;
        tab.rhs(i) = sign[i] * lp.rows[i].rhs;
        switch (sense[i]) {
            case RowSense::less_equal:
                r[next_slack] = 1.0;
                tab.basis()[i] = next_slack++;
                break;
            case RowSense::greater_equal:
                r[next_slack++] = -1.0;
                r[next_art] = 1.0;
                phase1[next_art] = -1.0;
                tab.basis()[i] = next_art++;
                break;
            case RowSense::equal:
                r[next_art] = 1.0;
                phase1[next_art] = -1.0;
                tab.basis()[i] = next_art++;
                break;
        }
    }
    tab.snapshot();

    LpResult result;
    PhaseControl ctl{opts_.optimality_tol, opts_.pivot_tol, opts_.feasibility_tol, 1e-10 * bmax,
                     opts_.iteration_factor * (m + cols), m};

    if (n_art > 0) {
        tab.price(phase1);
        auto outcome = run_phase(tab, phase1, ctl, result.iterations);
        if (outcome == PhaseOutcome::iteration_limit) {
            result.status = LpStatus::iteration_limit;
            return result;
        }
        double infeasibility = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            scale = std::max(scale, std::abs(tab.rhs(i)));
            if (tab.basis()[i] >= art_begin) infeasibility += std::max(0.0, tab.rhs(i));
        }
        if (infeasibility > opts_.feasibility_tol * scale) {
            result.status = LpStatus::infeasible;
            return result;
        }
        // Pivot zero-level artificials out of the basis where possible.
        for (std::size_t i = 0; i < m; ++i) {
            if (tab.basis()[i] < art_begin) continue;
            const double* r = tab.row(i);
            for (std::size_t j = 0; j < art_begin; ++j) {
                if (std::abs(r[j]) > opts_.pivot_tol) {
                    tab.rhs(i) = 0.0;
                    tab.pivot(i, j);
                    break;
                }
            }
        }
        for (std::size_t j = art_begin; j < cols; ++j) tab.enterable()[j] = 0;
    }

    std::vector<double> phase2(cols, 0.0);
    double cmax = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        phase2[j] = lp.objective[j];
        cmax = std::max(cmax, std::abs(lp.objective[j]));
    }
    tab.price(phase2);
    ctl.opt_tol = opts_.optimality_tol * cmax;
    auto outcome = run_phase(tab, phase2, ctl, result.iterations);
    if (outcome == PhaseOutcome::iteration_limit) {
        result.status = LpStatus::iteration_limit;
        return result;
    }
    if (outcome == PhaseOutcome::unbounded) {
        result.status = LpStatus::unbounded_guard;
        return result;
    }

    result.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis()[i] < n) result.x[tab.basis()[i]] = std::max(0.0, tab.rhs(i));
    result.objective = lp.objective_value(result.x);
    result.status = LpStatus::optimal;
    return result;
}

namespace {

std::string mps_number(double v) {
    char buf[64];
    for (int precision = 17; precision >= 1; --precision) {
        int len = std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (len <= 12) return std::string(buf, static_cast<std::size_t>(len));
    }
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

std::string mps_name(char prefix, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%07zu", prefix, index + 1);
    return buf;
}

// Field layout: 2-3 type, 5-12 name, 15-22 name, 25-36 value.
void mps_entry(std::ostream& out, const std::string& col, const std::string& row, double value) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "    %-8s  %-8s  %12s\n", col.c_str(), row.c_str(), mps_number(value).c_str());
    out << buf;
}

}  // namespace

void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name) {
    out << "NAME          " << name << '\n';
    out << "OBJSENSE\n    MAX\n";
    out << "ROWS\n N  COST\n";
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        const char* type = lp.rows[i].sense == RowSense::equal ? "E" : lp.rows[i].sense == RowSense::less_equal ? "L" : "G";
        out << ' ' << type << "  " << mps_name('R', i) << '\n';
    }
    // column-major listing of the constraint matrix
    std::vector<std::vector<std::pair<std::size_t, double>>> by_col(lp.n_vars);
    for (std::size_t i = 0; i < lp.rows.size(); ++i)
        for (const auto& [j, v] : lp.rows[i].terms)
            if (v != 0.0) by_col[j].emplace_back(i, v);
    out << "COLUMNS\n";
    for (std::size_t j = 0; j < lp.n_vars; ++j) {
        const std::string col = mps_name('X', j);
        if (lp.objective[j] != 0.0) mps_entry(out, col, "COST", lp.objective[j]);
        for (const auto& [i, v] : by_col[j]) mps_entry(out, col, mps_name('R', i), v);
    }
    out << "RHS\n";
    for (std::size_t i = 0; i < lp.rows.size(); ++i)
        if (lp.rows[i].rhs != 0.0) mps_entry(out, "RHS", mps_name('R', i), lp.rows[i].rhs);
    out << "ENDATA\n";
}

}  // namespace fairmt
