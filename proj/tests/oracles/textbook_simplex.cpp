#include "textbook_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace oracle {

namespace {

constexpr double kEps = 1e-9;

struct Tableau {
    std::size_t m = 0, cols = 0;
    std::vector<std::vector<double>> a;  // m rows of cols+1 (last = rhs)
    std::vector<std::size_t> basis;

    void pivot(std::size_t r, std::size_t e) {
        const double p = a[r][e];
        for (double& v : a[r]) v /= p;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r || a[i][e] == 0.0) continue;
            const double f = a[i][e];
            for (std::size_t j = 0; j <= cols; ++j) a[i][j] -= f * a[r][j];
        }
        basis[r] = e;
    }

    std::vector<double> reduced_costs(const std::vector<double>& c) const {
        std::vector<double> d(c);
        for (std::size_t i = 0; i < m; ++i) {
            const double cb = c[basis[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) d[j] -= cb * a[i][j];
        }
        return d;
    }
};

enum class Phase { optimal, unbounded };

// maximize c.x over the tableau; columns with allowed[j] == false never enter.
Phase optimize(Tableau& t, const std::vector<double>& c, const std::vector<bool>& allowed) {
    std::size_t degenerate = 0;
    for (std::size_t iter = 0; iter < 100000; ++iter) {
        const auto d = t.reduced_costs(c);
        const bool bland = degenerate > 50;
        std::size_t enter = t.cols;
        double best = kEps;
        for (std::size_t j = 0; j < t.cols; ++j) {
            if (!allowed[j] || d[j] <= kEps) continue;
            if (bland) {
                enter = j;
                break;
            }
            if (d[j] > best) {
                best = d[j];
                enter = j;
            }
        }
        if (enter == t.cols) return Phase::optimal;

        std::size_t leave = t.m;
        double ratio = 0.0;
        for (std::size_t i = 0; i < t.m; ++i) {
            if (t.a[i][enter] <= kEps) continue;
            const double q = t.a[i][t.cols] / t.a[i][enter];
            if (leave == t.m || q < ratio - 1e-12 || (q <= ratio + 1e-12 && t.basis[i] < t.basis[leave])) {
                leave = i;
                ratio = q;
            }
        }
        if (leave == t.m) return Phase::unbounded;
        degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;
        t.pivot(leave, enter);
    }
    return Phase::optimal;
}

}  // namespace

Solution textbook_simplex(const fairmt::LinearProgram& lp) {
    using fairmt::RowSense;
    const std::size_t n = lp.n_vars;
    const std::size_t m = lp.rows.size();

    // Normalise to b >= 0, then count slack and artificial columns.
    std::vector<std::vector<double>> dense(m, std::vector<double>(n, 0.0));
    std::vector<double> b(m);
    std::vector<RowSense> sense(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (const auto& [j, v] : lp.rows[i].terms) dense[i][j] += v;
        b[i] = lp.rows[i].rhs;
        sense[i] = lp.rows[i].sense;
        if (b[i] < 0) {
            for (double& v : dense[i]) v = -v;
            b[i] = -b[i];
            if (sense[i] == RowSense::less_equal) sense[i] = RowSense::greater_equal;
            else if (sense[i] == RowSense::greater_equal) sense[i] = RowSense::less_equal;
        }
    }
    std::size_t n_slack = 0, n_art = 0;
    for (auto s : sense) {
        if (s != RowSense::equal) ++n_slack;
        if (s != RowSense::less_equal) ++n_art;
    }

    Tableau t;
    t.m = m;
    t.cols = n + n_slack + n_art;
    t.a.assign(m, std::vector<double>(t.cols + 1, 0.0));
    t.basis.assign(m, 0);
    std::size_t slack = n, art = n + n_slack;
    for (std::size_t i = 0; i < m; ++i) {
        std::copy(dense[i].begin(), dense[i].end(), t.a[i].begin());
        t.a[i][t.cols] = b[i];
        if (sense[i] == RowSense::less_equal) {
            t.a[i][slack] = 1.0;
            t.basis[i] = slack++;
        } else {
            if (sense[i] == RowSense::greater_equal) t.a[i][slack++] = -1.0;
            t.a[i][art] = 1.0;
            t.basis[i] = art++;
        }
    }

    Solution out;
    std::vector<bool> allowed(t.cols, true);
    if (n_art > 0) {
        std::vector<double> c1(t.cols, 0.0);
        for (std::size_t j = n + n_slack; j < t.cols; ++j) c1[j] = -1.0;
        optimize(t, c1, allowed);
        double infeas = 0.0, scale = 1.0;
        for (double v : b) scale = std::max(scale, v);
        for (std::size_t i = 0; i < m; ++i)
            if (t.basis[i] >= n + n_slack) infeas += t.a[i][t.cols];
        if (infeas > 1e-7 * scale) return out;
        for (std::size_t i = 0; i < m; ++i) {
            if (t.basis[i] < n + n_slack) continue;
            for (std::size_t j = 0; j < n + n_slack; ++j) {
                if (std::abs(t.a[i][j]) > kEps) {
                    t.pivot(i, j);
                    break;
                }
            }
        }
        for (std::size_t j = n + n_slack; j < t.cols; ++j) allowed[j] = false;
    }

    std::vector<double> c(t.cols, 0.0);
    std::copy(lp.objective.begin(), lp.objective.end(), c.begin());
    if (optimize(t, c, allowed) == Phase::unbounded) {
        out.status = Status::unbounded;
        return out;
    }
    out.status = Status::optimal;
    out.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (t.basis[i] < n) out.x[t.basis[i]] = t.a[i][t.cols];
    for (std::size_t j = 0; j < n; ++j) out.objective += lp.objective[j] * out.x[j];
    return out;
}

}  // namespace oracle
