#include "decpomdp/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace decpomdp {

double max_violation(const MixedIntegerProgram& prog, const std::vector<double>& x) {
    double worst = 0.0;
    for (std::size_t j = 0; j < prog.vars.size(); ++j) {
        const auto& v = prog.vars[j];
        if (v.lower > -kInf) worst = std::max(worst, v.lower - x[j]);
        if (v.upper < kInf) worst = std::max(worst, x[j] - v.upper);
    }
    for (const auto& row : prog.rows) {
        double lhs = 0.0;
        for (auto [j, c] : row.coeffs) lhs += c * x[static_cast<std::size_t>(j)];
        switch (row.rel) {
            case Relation::less_equal: worst = std::max(worst, lhs - row.rhs); break;
            case Relation::greater_equal: worst = std::max(worst, row.rhs - lhs); break;
            case Relation::equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
        }
    }
    return worst;
}

namespace {

constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kRatioTieTol = 1e-9;
constexpr double kFeasTol = 1e-7;

enum VStat : unsigned char { AT_LB, AT_UB, BASIC };

struct SingularBasis : std::runtime_error {
    SingularBasis() : std::runtime_error("singular basis") {}
};

// How an original program variable maps onto engine columns.
struct VarMap {
    enum Kind { shifted, negated, split } kind = shifted;
    int col = -1;       // primary engine column
    int col_neg = -1;   // negative part for splits
    double offset = 0;  // x = offset + xt (shifted), x = offset - xt (negated)
};

// Engine-space problem: maximize c.x subject to A x (rel) b, 0 <= x <= ub,
// after slacks all rows are equalities. Columns: structural, then slacks,
// then one artificial per row (content re-signed per solve).
struct Engine {
    int m = 0;
    int ncols = 0;
    std::vector<std::vector<std::pair<int, double>>> cols;
    std::vector<double> ub;
    std::vector<double> cost;
    std::vector<double> b;
    int first_logical = 0;
    std::vector<int> art_cols;       // artificial column of each row
    std::vector<double> art_sign;    // its +-1 coefficient this solve
    std::vector<int> slack_cols;     // slack/surplus column, -1 for = rows

    bool dense = false;
    std::vector<double> tableau;  // dense: m x ncols row-major (Binv * A)
    std::vector<double> drow;     // dense: maintained reduced costs
    std::vector<double> binv;     // revised: m x m row-major

    std::vector<int> basis;
    std::vector<VStat> vstat;
    std::vector<double> nbval;
    std::vector<double> xb;
    std::vector<double> phase_cost;

    long iterations = 0;
    int refactorizations = 0;
    long pivots_since_refactor = 0;
    long bland_after = 0;
    long max_iterations = 0;
    long soft_abort_at = 0;  // warm-path budget; exceeding it falls back cold
    int refactor_interval = 0;
    PivotRule base_rule = PivotRule::dantzig;
    bool fact_current = false;  // factorization matches `basis` and `cols`

    double* trow(int i) { return tableau.data() + static_cast<std::size_t>(i) * ncols; }
    double* brow(int i) { return binv.data() + static_cast<std::size_t>(i) * m; }

    double col_dot(int j, const std::vector<double>& y) const {
        double s = 0.0;
        for (auto [i, a] : cols[j]) s += y[static_cast<std::size_t>(i)] * a;
        return s;
    }

    void ftran(int j, std::vector<double>& w) {
        if (dense) {
            for (int i = 0; i < m; ++i) w[i] = tableau[static_cast<std::size_t>(i) * ncols + j];
        } else {
            std::fill(w.begin(), w.end(), 0.0);
            for (auto [k, a] : cols[j]) {
                const double* bcol = binv.data() + static_cast<std::size_t>(k);
                for (int i = 0; i < m; ++i) w[i] += bcol[static_cast<std::size_t>(i) * m] * a;
            }
        }
    }

    // y = cB^T Binv for the current phase objective. In dense mode the
    // artificial columns carry sign * Binv[:,r].
    void btran_costs(std::vector<double>& y) {
        std::fill(y.begin(), y.end(), 0.0);
        if (dense) {
            for (int r = 0; r < m; ++r) {
                int lcol = art_cols[r];
                double s = 0.0;
                for (int i = 0; i < m; ++i)
                    s += phase_cost[basis[i]] * tableau[static_cast<std::size_t>(i) * ncols + lcol];
                y[r] = s * art_sign[r];
            }
        } else {
            for (int i = 0; i < m; ++i) {
                double ci = phase_cost[basis[i]];
                if (ci == 0.0) continue;
                const double* bi = brow(i);
                for (int r = 0; r < m; ++r) y[r] += ci * bi[r];
            }
        }
    }

    void binv_row(int r, std::vector<double>& out) {
        if (dense) {
            for (int k = 0; k < m; ++k)
                out[k] = tableau[static_cast<std::size_t>(r) * ncols + art_cols[k]] * art_sign[k];
        } else {
            const double* br = brow(r);
            std::copy(br, br + m, out.begin());
        }
    }

    void compute_basic_values() {
        std::vector<double> rhs(b);
        for (int j = 0; j < ncols; ++j) {
            if (vstat[j] == BASIC || nbval[j] == 0.0) continue;
            for (auto [i, a] : cols[j]) rhs[static_cast<std::size_t>(i)] -= a * nbval[j];
        }
        std::vector<double> row(m);
        for (int i = 0; i < m; ++i) {
            double s = 0.0;
            if (dense) {
                const double* ti = trow(i);
                for (int r = 0; r < m; ++r) s += ti[art_cols[r]] * art_sign[r] * rhs[r];
            } else {
                const double* bi = brow(i);
                for (int r = 0; r < m; ++r) s += bi[r] * rhs[r];
            }
            xb[i] = s;
        }
    }

    void refactor() {
        ++refactorizations;
        pivots_since_refactor = 0;
        fact_current = true;
        if (dense) {
            std::fill(tableau.begin(), tableau.end(), 0.0);
            for (int j = 0; j < ncols; ++j)
                for (auto [i, a] : cols[j]) tableau[static_cast<std::size_t>(i) * ncols + j] = a;
            for (int r = 0; r < m; ++r) {
                int q = basis[r];
                int prow = -1;
                double best = kPivotTol;
                for (int i = r; i < m; ++i) {
                    double v = std::abs(tableau[static_cast<std::size_t>(i) * ncols + q]);
                    if (v > best) {
                        best = v;
                        prow = i;
                    }
                }
                if (prow < 0) throw SingularBasis{};
                if (prow != r)
                    for (int k = 0; k < ncols; ++k)
                        std::swap(tableau[static_cast<std::size_t>(prow) * ncols + k],
                                  tableau[static_cast<std::size_t>(r) * ncols + k]);
                double* rowr = trow(r);
                double inv = 1.0 / rowr[q];
                for (int k = 0; k < ncols; ++k) rowr[k] *= inv;
                for (int i = 0; i < m; ++i) {
                    if (i == r) continue;
                    double f = tableau[static_cast<std::size_t>(i) * ncols + q];
                    if (f == 0.0) continue;
                    double* rowi = trow(i);
                    for (int k = 0; k < ncols; ++k) rowi[k] -= f * rowr[k];
                }
            }
        } else {
            std::fill(binv.begin(), binv.end(), 0.0);
            for (int i = 0; i < m; ++i) binv[static_cast<std::size_t>(i) * m + i] = 1.0;
            std::vector<double> W(static_cast<std::size_t>(m) * m, 0.0);
            for (int r = 0; r < m; ++r)
                for (auto [i, a] : cols[basis[r]]) W[static_cast<std::size_t>(i) * m + r] = a;
            for (int r = 0; r < m; ++r) {
                int prow = -1;
                double best = kPivotTol;
                for (int i = r; i < m; ++i) {
                    double v = std::abs(W[static_cast<std::size_t>(i) * m + r]);
                    if (v > best) {
                        best = v;
                        prow = i;
                    }
                }
                if (prow < 0) throw SingularBasis{};
                if (prow != r)
                    for (int k = 0; k < m; ++k) {
                        std::swap(W[static_cast<std::size_t>(prow) * m + k],
                                  W[static_cast<std::size_t>(r) * m + k]);
                        std::swap(binv[static_cast<std::size_t>(prow) * m + k],
                                  binv[static_cast<std::size_t>(r) * m + k]);
                    }
                double* Wr = W.data() + static_cast<std::size_t>(r) * m;
                double* Ir = brow(r);
                double inv = 1.0 / Wr[r];
                for (int k = 0; k < m; ++k) {
                    Wr[k] *= inv;
                    Ir[k] *= inv;
                }
                for (int i = 0; i < m; ++i) {
                    if (i == r) continue;
                    double f = W[static_cast<std::size_t>(i) * m + r];
                    if (f == 0.0) continue;
                    double* Wi = W.data() + static_cast<std::size_t>(i) * m;
                    double* Ii = brow(i);
                    for (int k = 0; k < m; ++k) {
                        Wi[k] -= f * Wr[k];
                        Ii[k] -= f * Ir[k];
                    }
                }
            }
        }
        compute_basic_values();
    }

    void recompute_dense_drow() {
        std::vector<double> y(m);
        btran_costs(y);
        for (int j = 0; j < ncols; ++j)
            drow[j] = vstat[j] == BASIC ? 0.0 : phase_cost[j] - col_dot(j, y);
    }

    void apply_pivot(int leave_row, int enter, const std::vector<double>& w) {
        ++pivots_since_refactor;
        if (dense) {
            double* prow = trow(leave_row);
            double inv = 1.0 / prow[enter];
            for (int k = 0; k < ncols; ++k) prow[k] *= inv;
            for (int i = 0; i < m; ++i) {
                if (i == leave_row) continue;
                double f = tableau[static_cast<std::size_t>(i) * ncols + enter];
                if (f == 0.0) continue;
                double* rowi = trow(i);
                for (int k = 0; k < ncols; ++k) rowi[k] -= f * prow[k];
            }
            double dq = drow[enter];
            if (dq != 0.0)
                for (int k = 0; k < ncols; ++k) drow[k] -= dq * prow[k];
            drow[enter] = 0.0;
        } else {
            double inv = 1.0 / w[leave_row];
            double* pr = brow(leave_row);
            for (int k = 0; k < m; ++k) pr[k] *= inv;
            for (int i = 0; i < m; ++i) {
                if (i == leave_row) continue;
                double f = w[i];
                if (f == 0.0) continue;
                double* ri = brow(i);
                for (int k = 0; k < m; ++k) ri[k] -= f * pr[k];
            }
        }
    }

    // Primal loop over the current phase objective. Returns false when the
    // phase objective is unbounded. Degeneracy storms trigger a deterministic
    // cost perturbation that is removed again before returning.
    bool iterate() {
        std::vector<double> w(m), y(m);
        if (dense) recompute_dense_drow();
        long since_refactor = 0;
        int verify_rounds = 0;
        long degenerate = 0;
        bool perturbed_costs = false;
        std::vector<double> saved_cost;
        auto drop_perturbation = [&] {
            if (!perturbed_costs) return false;
            phase_cost = saved_cost;
            perturbed_costs = false;
            degenerate = 0;
            if (dense) recompute_dense_drow();
            return true;
        };
        while (true) {
            if (iterations >= max_iterations) throw std::runtime_error("simplex iteration cap hit");
            if (soft_abort_at > 0 && iterations >= soft_abort_at) throw SingularBasis{};
            bool bland = base_rule == PivotRule::bland || iterations >= bland_after;
            if (!perturbed_costs && degenerate > m / 2 + 25) {
                // deterministic tie-breaking noise on the nonbasic costs
                saved_cost = phase_cost;
                perturbed_costs = true;
                degenerate = 0;
                double scale = 0.0;
                for (double c : phase_cost) scale = std::max(scale, std::abs(c));
                scale = (scale == 0.0 ? 1.0 : scale) * 1e-9;
                for (int j = 0; j < ncols; ++j) {
                    if (vstat[j] == BASIC) continue;
                    unsigned int h = static_cast<unsigned int>(j) * 2654435761u;
                    double noise = scale * (1.0 + static_cast<double>(h >> 24) / 256.0);
                    phase_cost[j] -= vstat[j] == AT_LB ? noise : -noise;
                }
                if (dense) recompute_dense_drow();
            }
            if (!dense) btran_costs(y);

            int enter = -1;
            int dir = +1;
            double best = 0.0;
            for (int j = 0; j < ncols; ++j) {
                if (vstat[j] == BASIC || ub[j] <= 0.0) continue;
                double d = dense ? drow[j] : phase_cost[j] - col_dot(j, y);
                double score;
                int ddir;
                if (vstat[j] == AT_LB && d > kCostTol) {
                    score = d;
                    ddir = +1;
                } else if (vstat[j] == AT_UB && d < -kCostTol) {
                    score = -d;
                    ddir = -1;
                } else {
                    continue;
                }
                if (bland) {
                    enter = j;
                    dir = ddir;
                    break;
                }
                if (score > best + 1e-15) {
                    best = score;
                    enter = j;
                    dir = ddir;
                }
            }
            if (enter < 0) {
                if (drop_perturbation()) continue;  // clean up with true costs
                // claimed optimal: when enough pivots have piled onto the
                // factorization (possibly across warm-started solves), refresh
                // it once and re-price
                if (verify_rounds < 1 && m > 0 && pivots_since_refactor >= 64) {
                    ++verify_rounds;
                    refactor();
                    if (dense) recompute_dense_drow();
                    since_refactor = 0;
                    continue;
                }
                return true;
            }
            verify_rounds = 0;

            ftran(enter, w);

            double limit = ub[enter];
            int leave_row = -1;
            double leave_pivot = 0.0;
            for (int i = 0; i < m; ++i) {
                double delta = dir * w[i];
                if (std::abs(delta) < kPivotTol) continue;
                int k = basis[i];
                double t;
                if (delta > 0.0) {
                    t = xb[i] / delta;
                } else {
                    if (ub[k] >= kInf) continue;
                    t = (ub[k] - xb[i]) / (-delta);
                }
                if (t < 0.0) t = 0.0;
                bool better = false;
                if (leave_row < 0) {
                    better = t <= limit + kRatioTieTol;
                } else if (t < limit - kRatioTieTol) {
                    better = true;
                } else if (t <= limit + kRatioTieTol) {
                    better = bland ? basis[i] < basis[leave_row]
                                   : std::abs(delta) > std::abs(leave_pivot) + 1e-15;
                }
                if (better) {
                    limit = std::min(limit, t);
                    leave_row = i;
                    leave_pivot = delta;
                }
            }

            if (leave_row < 0) {
                if (!(ub[enter] < kInf)) {
                    if (drop_perturbation()) continue;  // confirm with true costs
                    return false;                       // unbounded direction
                }
                ++iterations;
                double t = ub[enter];
                for (int i = 0; i < m; ++i) xb[i] -= dir * t * w[i];
                vstat[enter] = vstat[enter] == AT_LB ? AT_UB : AT_LB;
                nbval[enter] = vstat[enter] == AT_UB ? ub[enter] : 0.0;
                degenerate = 0;
                continue;
            }

            ++iterations;
            ++since_refactor;
            double t = limit;
            if (t <= 1e-9) ++degenerate; else degenerate = 0;
            int leaving = basis[leave_row];
            for (int i = 0; i < m; ++i) xb[i] -= dir * t * w[i];
            double enter_val = vstat[enter] == AT_LB ? t : ub[enter] - t;
            if (leave_pivot > 0.0) {
                vstat[leaving] = AT_LB;
                nbval[leaving] = 0.0;
            } else {
                vstat[leaving] = AT_UB;
                nbval[leaving] = ub[leaving];
            }
            basis[leave_row] = enter;
            vstat[enter] = BASIC;
            nbval[enter] = 0.0;
            apply_pivot(leave_row, enter, w);
            xb[leave_row] = enter_val;

            if (!dense && refactor_interval > 0 && since_refactor >= refactor_interval) {
                refactor();
                since_refactor = 0;
            }
        }
    }

    // Dual simplex: repairs primal bound violations while reduced costs stay
    // dual-feasible; used on warm bases after bound tightening. Returns
    // false when the LP is infeasible.
    bool dual_repair() {
        std::vector<double> y(m), w(m), br(m), alpha(ncols, 0.0);
        long guard = 0;
        long degenerate = 0;
        const long guard_cap = 3L * m + 200;  // beyond this a cold start is cheaper
        while (true) {
            if (iterations >= max_iterations) throw std::runtime_error("simplex iteration cap hit");
            if (++guard > guard_cap) throw SingularBasis{};
            bool bland = degenerate > m + 16;
            int r = -1;
            double worst = kFeasTol;
            bool to_upper = false;
            for (int i = 0; i < m; ++i) {
                int k = basis[i];
                double low_v = -xb[i];
                double up_v = ub[k] < kInf ? xb[i] - ub[k] : -kInf;
                if (low_v > worst) {
                    worst = low_v;
                    r = i;
                    to_upper = false;
                }
                if (up_v > worst) {
                    worst = up_v;
                    r = i;
                    to_upper = true;
                }
            }
            if (r < 0) return true;

            btran_costs(y);
            binv_row(r, br);
            for (int j = 0; j < ncols; ++j) {
                if (vstat[j] == BASIC) {
                    alpha[j] = 0.0;
                    continue;
                }
                double s = 0.0;
                for (auto [i, a] : cols[j]) s += br[static_cast<std::size_t>(i)] * a;
                alpha[j] = s;
            }
            int enter = -1;
            double best_ratio = kInf, best_alpha = 0.0;
            for (int j = 0; j < ncols; ++j) {
                if (vstat[j] == BASIC || ub[j] <= 0.0) continue;
                double a = alpha[j];
                bool eligible = to_upper ? (vstat[j] == AT_LB ? a > kPivotTol : a < -kPivotTol)
                                         : (vstat[j] == AT_LB ? a < -kPivotTol : a > kPivotTol);
                if (!eligible) continue;
                double d = phase_cost[j] - col_dot(j, y);
                double ratio = std::abs(d) / std::abs(a);
                if (bland) {  // smallest eligible index with a near-minimal ratio
                    if (ratio < best_ratio - 1e-9) {
                        best_ratio = ratio;
                        enter = j;
                        best_alpha = a;
                    }
                    continue;
                }
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && std::abs(a) > std::abs(best_alpha) + 1e-15)) {
                    best_ratio = ratio;
                    enter = j;
                    best_alpha = a;
                }
            }
            if (enter < 0) return false;

            ++iterations;
            ftran(enter, w);
            if (std::abs(w[r]) < kPivotTol) throw SingularBasis{};
            int dir = vstat[enter] == AT_LB ? +1 : -1;
            double target = to_upper ? ub[basis[r]] : 0.0;
            double theta = (xb[r] - target) / (dir * w[r]);
            if (theta < 0.0) theta = 0.0;
            if (best_ratio <= 1e-12) ++degenerate; else degenerate = 0;
            int leaving = basis[r];
            for (int i = 0; i < m; ++i) xb[i] -= dir * theta * w[i];
            double enter_val = vstat[enter] == AT_LB ? theta : ub[enter] - theta;
            vstat[leaving] = to_upper ? AT_UB : AT_LB;
            nbval[leaving] = to_upper ? ub[leaving] : 0.0;
            basis[r] = enter;
            vstat[enter] = BASIC;
            nbval[enter] = 0.0;
            apply_pivot(r, enter, w);
            xb[r] = enter_val;
        }
    }

    double objective_value() const {
        double v = 0.0;
        for (int i = 0; i < m; ++i) v += cost[basis[i]] * xb[i];
        for (int j = 0; j < ncols; ++j)
            if (vstat[j] != BASIC && nbval[j] != 0.0) v += cost[j] * nbval[j];
        return v;
    }

    double phase_value() const {
        double v = 0.0;
        for (int i = 0; i < m; ++i) v += phase_cost[basis[i]] * xb[i];
        for (int j = 0; j < ncols; ++j)
            if (vstat[j] != BASIC && nbval[j] != 0.0) v += phase_cost[j] * nbval[j];
        return v;
    }

    // Dual objective y.b + sum over nonbasic-at-upper of d_j u_j, from the
    // final basis (the strong-duality spot check).
    double dual_value() {
        std::vector<double> y(m);
        phase_cost = cost;
        btran_costs(y);
        double v = 0.0;
        for (int r = 0; r < m; ++r) v += y[r] * b[r];
        for (int j = 0; j < ncols; ++j) {
            if (vstat[j] == AT_UB && ub[j] > 0.0 && ub[j] < kInf) {
                double d = cost[j] - col_dot(j, y);
                v += d * ub[j];
            }
        }
        return v;
    }
};

}  // namespace

// Persistent workspace: column skeleton fixed at construction, bounds and
// right-hand sides refreshed per solve.
struct PreparedLp::Impl {
    const MixedIntegerProgram* prog = nullptr;
    SimplexOptions opt;
    std::vector<VarMap> maps;
    Engine eng;
    std::vector<Relation> rel;
    double obj_offset = 0.0;
    bool negated_sense = false;

    Impl(const MixedIntegerProgram& p, const SimplexOptions& options) : prog(&p), opt(options) {
        const int nv = static_cast<int>(p.vars.size());
        maps.resize(nv);
        negated_sense = p.sense == Sense::minimize;
        double sense_mult = negated_sense ? -1.0 : 1.0;
        std::vector<double> obj(nv, 0.0);
        for (auto [j, c] : p.objective) obj[j] += sense_mult * c;

        int col = 0;
        for (int j = 0; j < nv; ++j) {
            VarMap& vm = maps[j];
            if (p.vars[j].lower > -kInf) {
                vm.kind = VarMap::shifted;
                vm.col = col++;
            } else if (p.vars[j].upper < kInf) {
                vm.kind = VarMap::negated;
                vm.col = col++;
            } else {
                vm.kind = VarMap::split;
                vm.col = col++;
                vm.col_neg = col++;
            }
        }
        const int nstruct = col;
        eng.m = static_cast<int>(p.rows.size());
        eng.cols.assign(nstruct, {});
        eng.cost.assign(nstruct, 0.0);
        for (int j = 0; j < nv; ++j) {
            const VarMap& vm = maps[j];
            switch (vm.kind) {
                case VarMap::shifted: eng.cost[vm.col] = obj[j]; break;
                case VarMap::negated: eng.cost[vm.col] = -obj[j]; break;
                case VarMap::split:
                    eng.cost[vm.col] = obj[j];
                    eng.cost[vm.col_neg] = -obj[j];
                    break;
            }
        }
        rel.resize(eng.m);
        std::vector<std::vector<std::pair<int, double>>> rowcoef(eng.m);
        for (int r = 0; r < eng.m; ++r) {
            const auto& row = p.rows[r];
            rel[r] = row.rel;
            std::vector<std::pair<int, double>> cs;
            for (auto [j, c] : row.coeffs) {
                if (c == 0.0) continue;
                const VarMap& vm = maps[j];
                switch (vm.kind) {
                    case VarMap::shifted: cs.emplace_back(vm.col, c); break;
                    case VarMap::negated: cs.emplace_back(vm.col, -c); break;
                    case VarMap::split:
                        cs.emplace_back(vm.col, c);
                        cs.emplace_back(vm.col_neg, -c);
                        break;
                }
            }
            std::sort(cs.begin(), cs.end());
            std::vector<std::pair<int, double>> merged;
            for (auto& [cj, cc] : cs) {
                if (!merged.empty() && merged.back().first == cj)
                    merged.back().second += cc;
                else
                    merged.emplace_back(cj, cc);
            }
            rowcoef[r] = std::move(merged);
        }
        eng.first_logical = nstruct;
        eng.slack_cols.assign(eng.m, -1);
        for (int r = 0; r < eng.m; ++r) {
            if (rel[r] == Relation::equal) continue;
            eng.slack_cols[r] = static_cast<int>(eng.cols.size());
            eng.cols.push_back({{r, rel[r] == Relation::less_equal ? 1.0 : -1.0}});
            eng.cost.push_back(0.0);
        }
        eng.art_cols.assign(eng.m, -1);
        eng.art_sign.assign(eng.m, 1.0);
        for (int r = 0; r < eng.m; ++r) {
            eng.art_cols[r] = static_cast<int>(eng.cols.size());
            eng.cols.push_back({{r, 1.0}});
            eng.cost.push_back(0.0);
        }
        for (int r = 0; r < eng.m; ++r)
            for (auto [cj, cc] : rowcoef[r])
                if (cc != 0.0) eng.cols[cj].emplace_back(r, cc);
        for (int j = 0; j < nstruct; ++j) std::sort(eng.cols[j].begin(), eng.cols[j].end());

        eng.ncols = static_cast<int>(eng.cols.size());
        eng.ub.assign(eng.ncols, kInf);
        eng.dense = nv < opt.dense_threshold &&
                    static_cast<long long>(eng.m) * eng.ncols <= 80000000LL;
        eng.max_iterations = opt.max_iterations;
        eng.base_rule = opt.rule;
        eng.bland_after = 10L * (eng.m + eng.ncols);
        if (opt.refactor_interval > 0)
            eng.refactor_interval = opt.refactor_interval;
        else
            eng.refactor_interval = std::max(100, static_cast<int>(4000000L / std::max(1, eng.m)));
    }

    // Refreshes bounds, costs offsets and right-hand sides for this solve.
    // Returns false when the finiteness pattern no longer matches.
    bool apply_bounds(const std::vector<double>& lo_ovr, const std::vector<double>& up_ovr) {
        const MixedIntegerProgram& p = *prog;
        const int nv = static_cast<int>(p.vars.size());
        obj_offset = 0.0;
        double sense_mult = negated_sense ? -1.0 : 1.0;
        std::vector<double> obj(nv, 0.0);
        for (auto [j, c] : p.objective) obj[j] += sense_mult * c;
        for (int j = 0; j < nv; ++j) {
            double lower = lo_ovr.empty() ? p.vars[j].lower : lo_ovr[j];
            double upper = up_ovr.empty() ? p.vars[j].upper : up_ovr[j];
            if (lower > upper + 1e-12)
                throw std::invalid_argument("variable " + p.vars[j].label +
                                            " has an empty range");
            VarMap& vm = maps[j];
            switch (vm.kind) {
                case VarMap::shifted:
                    if (!(lower > -kInf)) return false;
                    vm.offset = lower;
                    eng.ub[vm.col] = upper < kInf ? upper - lower : kInf;
                    obj_offset += obj[j] * lower;
                    break;
                case VarMap::negated:
                    if (lower > -kInf || !(upper < kInf)) return false;
                    vm.offset = upper;
                    eng.ub[vm.col] = kInf;
                    obj_offset += obj[j] * upper;
                    break;
                case VarMap::split:
                    if (lower > -kInf || upper < kInf) return false;
                    eng.ub[vm.col] = kInf;
                    eng.ub[vm.col_neg] = kInf;
                    break;
            }
        }
        eng.b.assign(eng.m, 0.0);
        for (int r = 0; r < eng.m; ++r) {
            const auto& row = p.rows[r];
            double rhs = row.rhs;
            for (auto [j, c] : row.coeffs) {
                const VarMap& vm = maps[j];
                if (vm.kind != VarMap::split) rhs -= c * vm.offset;
            }
            eng.b[r] = rhs;
        }
        for (int r = 0; r < eng.m; ++r) {
            if (eng.slack_cols[r] >= 0) eng.ub[eng.slack_cols[r]] = kInf;
            double s = eng.b[r] >= 0.0 ? 1.0 : -1.0;
            if (s != eng.art_sign[r]) {
                eng.art_sign[r] = s;
                eng.cols[eng.art_cols[r]][0].second = s;
                eng.fact_current = false;  // column content changed
            }
            eng.ub[eng.art_cols[r]] = kInf;  // cold start re-pins after phase 1
        }
        return true;
    }

    SolveReport run(const WarmBasis* warm, WarmBasis* out_basis, int attempt) {
        Engine& e = eng;
        const int m = e.m;
        if (attempt > 0) {
            double epsv = attempt == 1 ? 1e-9 : 1e-7;
            for (int r = 0; r < m; ++r) e.b[r] += epsv * (r + 1);
        }
        SolveReport rep;
        e.iterations = 0;
        e.refactorizations = 0;
        e.pivots_since_refactor = 0;

        bool warm_ok = false;
        if (warm && warm->valid && static_cast<int>(warm->basis.size()) == m &&
            static_cast<int>(warm->vstat.size()) == e.ncols) {
            for (int r = 0; r < m; ++r) e.ub[e.art_cols[r]] = 0.0;
            bool same_basis = e.fact_current && e.basis == warm->basis;
            e.basis = warm->basis;
            e.vstat.assign(e.ncols, AT_LB);
            e.nbval.assign(e.ncols, 0.0);
            e.xb.assign(m, 0.0);
            for (int j = 0; j < e.ncols; ++j) {
                VStat s = static_cast<VStat>(warm->vstat[j]);
                if (s == AT_UB && !(e.ub[j] < kInf)) s = AT_LB;
                if (e.ub[j] <= 0.0 && s != BASIC) s = AT_LB;
                e.vstat[j] = s;
                e.nbval[j] = s == AT_UB ? e.ub[j] : 0.0;
            }
            if (!same_basis && e.dense) {
                e.tableau.assign(static_cast<std::size_t>(m) * e.ncols, 0.0);
                e.drow.assign(e.ncols, 0.0);
            } else if (!same_basis) {
                e.binv.assign(static_cast<std::size_t>(m) * m, 0.0);
            }
            try {
                if (same_basis)
                    e.compute_basic_values();  // factorization carried over
                else
                    e.refactor();
                e.phase_cost = e.cost;
                if (e.dense) e.recompute_dense_drow();
                bool feasible = e.dual_repair();
                if (!feasible) {
                    rep.status = SolveStatus::infeasible;
                    rep.stats.simplex_iterations = e.iterations;
                    rep.stats.refactorizations = e.refactorizations;
                    if (out_basis) out_basis->valid = false;
                    return rep;
                }
                // finish primal within a budget; a churn falls back cold
                e.soft_abort_at = e.iterations + 3L * m + 300;
                bool bounded = e.iterate();
                e.soft_abort_at = 0;
                if (!bounded) {
                    rep.status = SolveStatus::unbounded;
                    rep.stats.simplex_iterations = e.iterations;
                    rep.stats.refactorizations = e.refactorizations;
                    if (out_basis) out_basis->valid = false;
                    return rep;
                }
                warm_ok = true;
            } catch (const SingularBasis&) {
                e.soft_abort_at = 0;
                warm_ok = false;
            }
        }

        if (!warm_ok) {
            for (int r = 0; r < m; ++r) e.ub[e.art_cols[r]] = kInf;  // unpin after a warm attempt
            e.basis.assign(m, -1);
            e.vstat.assign(e.ncols, AT_LB);
            e.nbval.assign(e.ncols, 0.0);
            e.xb.assign(m, 0.0);
            bool need_phase1 = false;
            for (int r = 0; r < m; ++r) {
                int basic;
                double bval;
                if (e.slack_cols[r] >= 0) {
                    double sval = rel[r] == Relation::less_equal ? e.b[r] : -e.b[r];
                    if (sval >= 0.0) {
                        basic = e.slack_cols[r];
                        bval = sval;
                    } else {
                        basic = e.art_cols[r];
                        bval = std::abs(e.b[r]);
                        need_phase1 = true;
                    }
                } else {
                    basic = e.art_cols[r];
                    bval = std::abs(e.b[r]);
                    if (bval > 0.0) need_phase1 = true;
                }
                e.basis[r] = basic;
                e.vstat[basic] = BASIC;
                e.xb[r] = bval;
            }
            if (e.dense) {
                e.tableau.assign(static_cast<std::size_t>(m) * e.ncols, 0.0);
                e.drow.assign(e.ncols, 0.0);
                for (int j = 0; j < e.ncols; ++j)
                    for (auto [i, a] : e.cols[j])
                        e.tableau[static_cast<std::size_t>(i) * e.ncols + j] = a;
            } else {
                e.binv.assign(static_cast<std::size_t>(m) * m, 0.0);
                for (int i = 0; i < m; ++i) e.binv[static_cast<std::size_t>(i) * m + i] = 1.0;
            }
            // initial basic columns are +-e_r; negate factorization rows where
            // the unit coefficient is -1 (surplus columns, negative artificials)
            for (int r = 0; r < m; ++r) {
                double sgn = e.basis[r] == e.art_cols[r]
                                 ? e.art_sign[r]
                                 : (rel[r] == Relation::greater_equal ? -1.0 : 1.0);
                if (sgn >= 0.0) continue;
                if (e.dense) {
                    double* rowr = e.trow(r);
                    for (int k = 0; k < e.ncols; ++k) rowr[k] = -rowr[k];
                } else {
                    e.brow(r)[r] = -1.0;
                }
            }
            e.fact_current = true;
            e.pivots_since_refactor = 0;

            if (need_phase1) {
                e.phase_cost.assign(e.ncols, 0.0);
                for (int r = 0; r < m; ++r) e.phase_cost[e.art_cols[r]] = -1.0;
                if (!e.iterate()) throw SingularBasis{};
                if (e.phase_value() < -kFeasTol) {
                    rep.status = SolveStatus::infeasible;
                    rep.stats.simplex_iterations = e.iterations;
                    rep.stats.refactorizations = e.refactorizations;
                    if (out_basis) out_basis->valid = false;
                    return rep;
                }
            }
            for (int r = 0; r < m; ++r) e.ub[e.art_cols[r]] = 0.0;
            // drive basic artificials out where a non-artificial pivot exists
            std::vector<double> w(m), br(m);
            for (int rr = 0; rr < m; ++rr) {
                int a = e.basis[rr];
                bool is_art = a >= e.art_cols[0] && a == e.art_cols[a - e.art_cols[0]];
                if (!is_art) continue;
                e.binv_row(rr, br);
                int repl = -1;
                for (int j = 0; j < e.art_cols[0] && repl < 0; ++j) {
                    if (e.vstat[j] == BASIC || e.ub[j] <= 0.0) continue;
                    double v = 0.0;
                    for (auto [i, av] : e.cols[j]) v += br[static_cast<std::size_t>(i)] * av;
                    if (std::abs(v) > 1e-7) repl = j;
                }
                if (repl < 0) continue;  // redundant row
                e.ftran(repl, w);
                if (std::abs(w[rr]) < kPivotTol) continue;
                double entering_val = e.vstat[repl] == AT_UB ? e.nbval[repl] : 0.0;
                e.basis[rr] = repl;
                e.vstat[a] = AT_LB;
                e.nbval[a] = 0.0;
                e.vstat[repl] = BASIC;
                e.nbval[repl] = 0.0;
                e.apply_pivot(rr, repl, w);
                e.xb[rr] = entering_val;
                e.compute_basic_values();
            }
            e.phase_cost = e.cost;
            if (e.dense) e.recompute_dense_drow();
        }

        if (!e.iterate()) {
            rep.status = SolveStatus::unbounded;
            rep.stats.simplex_iterations = e.iterations;
            rep.stats.refactorizations = e.refactorizations;
            if (out_basis) out_basis->valid = false;
            return rep;
        }

        rep.status = SolveStatus::optimal;
        rep.stats.simplex_iterations = e.iterations;
        rep.stats.refactorizations = e.refactorizations;
        if (out_basis) {
            out_basis->basis = e.basis;
            out_basis->vstat.assign(e.vstat.begin(), e.vstat.end());
            out_basis->valid = true;
        }

        std::vector<double> xs(e.ncols, 0.0);
        for (int j = 0; j < e.ncols; ++j)
            if (e.vstat[j] != BASIC) xs[j] = e.nbval[j];
        for (int i = 0; i < m; ++i) xs[e.basis[i]] = e.xb[i];

        const MixedIntegerProgram& p = *prog;
        rep.assignment.assign(p.vars.size(), 0.0);
        for (std::size_t j = 0; j < p.vars.size(); ++j) {
            const VarMap& vm = maps[j];
            switch (vm.kind) {
                case VarMap::shifted: rep.assignment[j] = vm.offset + xs[vm.col]; break;
                case VarMap::negated: rep.assignment[j] = vm.offset - xs[vm.col]; break;
                case VarMap::split: rep.assignment[j] = xs[vm.col] - xs[vm.col_neg]; break;
            }
        }
        {
            // reduced costs of the original variables (maximization space)
            std::vector<double> y(m);
            e.phase_cost = e.cost;
            e.btran_costs(y);
            rep.reduced_costs.assign(p.vars.size(), 0.0);
            for (std::size_t j = 0; j < p.vars.size(); ++j) {
                const VarMap& vm = maps[j];
                if (e.vstat[vm.col] == BASIC) continue;
                double d = e.cost[vm.col] - e.col_dot(vm.col, y);
                rep.reduced_costs[j] = vm.kind == VarMap::negated ? -d : d;
            }
        }
        double val = e.objective_value() + obj_offset;
        double dual = e.dual_value() + obj_offset;
        if (negated_sense) {
            val = -val;
            dual = -dual;
        }
        rep.value = val;
        rep.stats.dual_value = dual;
        return rep;
    }
};

PreparedLp::PreparedLp(const MixedIntegerProgram& prog, const SimplexOptions& options)
    : impl_(std::make_unique<Impl>(prog, options)) {}
PreparedLp::~PreparedLp() = default;
PreparedLp::PreparedLp(PreparedLp&&) noexcept = default;
PreparedLp& PreparedLp::operator=(PreparedLp&&) noexcept = default;

SolveReport PreparedLp::solve(const std::vector<double>& lower_override,
                              const std::vector<double>& upper_override, const WarmBasis* warm,
                              WarmBasis* out_basis) {
    auto t0 = std::chrono::steady_clock::now();
    SolveReport rep;
    bool perturbed = false;
    for (int attempt = 0; attempt < 3; ++attempt) {
        if (!impl_->apply_bounds(lower_override, upper_override))
            throw std::invalid_argument(
                "bound overrides change which bounds are finite; rebuild the workspace");
        if (attempt > 0) perturbed = true;
        try {
            rep = impl_->run(attempt == 0 ? warm : nullptr, out_basis, attempt);
            break;
        } catch (const SingularBasis&) {
            if (attempt == 2) throw std::runtime_error("simplex: singular basis persists");
        }
    }
    rep.stats.rhs_perturbed = perturbed;
    rep.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

SolveReport solve_lp(const MixedIntegerProgram& prog, const SimplexOptions& options,
                     const std::vector<double>& lower_override,
                     const std::vector<double>& upper_override, const WarmBasis* warm,
                     WarmBasis* out_basis) {
    PreparedLp lp(prog, options);
    return lp.solve(lower_override, upper_override, warm, out_basis);
}

SolveReport solve_lp(const MixedIntegerProgram& prog, const SimplexOptions& options) {
    return solve_lp(prog, options, {}, {}, nullptr, nullptr);
}

}  // namespace decpomdp
