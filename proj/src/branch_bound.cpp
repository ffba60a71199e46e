#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <vector>

#include "decpomdp/optimize.hpp"

namespace decpomdp {

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kPruneTol = 1e-9;

struct Node {
    std::vector<std::pair<int, double>> fixes;  // (binary var index, 0 or 1)
    double bound;                               // parent relaxation value
    std::shared_ptr<const WarmBasis> warm;      // parent optimal basis
};

}  // namespace

SolveReport solve_milp(const MixedIntegerProgram& prog, const MilpOptions& options) {
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const double sense_mult = prog.sense == Sense::maximize ? 1.0 : -1.0;

    std::vector<int> binaries;
    for (std::size_t j = 0; j < prog.vars.size(); ++j)
        if (prog.vars[j].kind == VarKind::binary) binaries.push_back(static_cast<int>(j));

    std::vector<double> base_lo(prog.vars.size()), base_up(prog.vars.size());
    for (std::size_t j = 0; j < prog.vars.size(); ++j) {
        base_lo[j] = prog.vars[j].lower;
        base_up[j] = prog.vars[j].upper;
    }

    SolveReport best;
    best.status = SolveStatus::infeasible;
    bool have_solution = false;
    // comparisons happen in maximization space
    double incumbent = options.use_warm_bound ? sense_mult * options.warm_bound : -kInf;

    long nodes_explored = 0;  // nodes created by branching (root not counted)
    long total_iterations = 0;
    bool hit_node_cap = false, hit_time_cap = false, saw_unbounded = false;

    PreparedLp workspace(prog, options.lp);
    std::vector<Node> stack;
    stack.push_back(Node{{}, kInf, nullptr});
    std::vector<double> lo, up;
    long pops = 0;

    while (!stack.empty()) {
        if (options.node_cap >= 0 && nodes_explored > options.node_cap) {
            hit_node_cap = true;
            break;
        }
        if (options.time_cap_secs >= 0 && elapsed() > options.time_cap_secs) {
            hit_time_cap = true;
            break;
        }
        ++pops;
        if (options.log_every > 0 && pops % options.log_every == 0) {
            double open_bound = -kInf;
            for (const auto& n : stack) open_bound = std::max(open_bound, n.bound);
            std::fprintf(stderr,
                         "[bb] nodes=%ld open=%zu best-open-bound=%.6f incumbent=%s%.6f "
                         "iters=%ld %.1fs\n",
                         nodes_explored, stack.size(), open_bound, have_solution ? "" : "(seed)",
                         sense_mult * incumbent, total_iterations, elapsed());
        }
        if (options.best_bound_restart > 0 && pops % options.best_bound_restart == 0 &&
            stack.size() > 1) {
            // periodically re-anchor the dive on the best-bound open node
            std::size_t bi = 0;
            for (std::size_t i = 1; i < stack.size(); ++i)
                if (stack[i].bound > stack[bi].bound) bi = i;
            std::swap(stack[bi], stack.back());
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        if (!node.fixes.empty()) ++nodes_explored;

        if (node.bound <= incumbent - kPruneTol) continue;

        lo = base_lo;
        up = base_up;
        for (auto [j, v] : node.fixes) {
            lo[static_cast<std::size_t>(j)] = v;
            up[static_cast<std::size_t>(j)] = v;
        }
        auto basis = std::make_shared<WarmBasis>();
        SolveReport relax = workspace.solve(lo, up, node.warm.get(), basis.get());
        total_iterations += relax.stats.simplex_iterations;
        if (options.log_every > 0 && relax.stats.simplex_iterations > 3000)
        {
            std::fprintf(stderr, "[bb] heavy node: %ld iters refac=%d depth=%zu status=%s\n",
                         relax.stats.simplex_iterations, relax.stats.refactorizations,
                         node.fixes.size(), to_string(relax.status));
            if (const char* dump = std::getenv("DECPOMDP_DUMP_FIXES")) {
                FILE* f = std::fopen(dump, "w");
                for (auto [j, v] : node.fixes) std::fprintf(f, "%d %g\n", j, v);
                std::fclose(f);
                std::exit(9);
            }
        }
        if (relax.status == SolveStatus::infeasible) continue;
        if (relax.status == SolveStatus::unbounded) {
            saw_unbounded = true;
            break;
        }
        double relax_val = sense_mult * relax.value;
        if (relax_val <= incumbent - kPruneTol) continue;

        // most fractional binary; ties toward the lowest variable index
        int branch_var = -1;
        double branch_frac = kIntTol;
        for (int j : binaries) {
            double v = relax.assignment[static_cast<std::size_t>(j)];
            double dist = std::min(v - std::floor(v), std::ceil(v) - v);
            dist = std::min(dist, std::abs(v));  // guard values just outside [0,1]
            dist = std::min(dist, std::abs(1.0 - v));
            if (dist > branch_frac + 1e-15) {
                branch_frac = dist;
                branch_var = j;
            }
        }
        if (branch_var < 0) {
            // integral within tolerance
            if (!have_solution || relax_val > incumbent + kPruneTol) {
                have_solution = true;
                incumbent = std::max(incumbent, relax_val);
                best.value = relax.value;
                best.assignment = relax.assignment;
            }
            continue;
        }

        // reduced-cost fixing: a binary resting at a bound whose flip is
        // already worse than the incumbent stays fixed in this subtree
        std::vector<std::pair<int, double>> fixed(std::move(node.fixes));
        if (have_solution || options.use_warm_bound) {
            std::size_t inherited = fixed.size();
            for (int j : binaries) {
                double v = relax.assignment[static_cast<std::size_t>(j)];
                double rc = relax.reduced_costs[static_cast<std::size_t>(j)];
                if (rc == 0.0) continue;
                bool at_zero = v <= kIntTol, at_one = v >= 1.0 - kIntTol;
                if (!at_zero && !at_one) continue;
                if (relax_val - std::abs(rc) > incumbent - kPruneTol) continue;
                bool already = false;
                for (std::size_t k = 0; k < inherited && !already; ++k)
                    already = fixed[k].first == j;
                if (!already) fixed.emplace_back(j, at_one ? 1.0 : 0.0);
            }
        }

        double v = relax.assignment[static_cast<std::size_t>(branch_var)];
        double first = v >= 0.5 ? 1.0 : 0.0;  // explore the nearer side first
        Node far{fixed, relax_val, basis};
        far.fixes.emplace_back(branch_var, 1.0 - first);
        Node near{std::move(fixed), relax_val, basis};
        near.fixes.emplace_back(branch_var, first);
        stack.push_back(std::move(far));
        stack.push_back(std::move(near));
    }

    if (saw_unbounded) {
        best.status = SolveStatus::unbounded;
    } else if (hit_node_cap) {
        best.status = SolveStatus::node_limit;
    } else if (hit_time_cap) {
        best.status = SolveStatus::time_limit;
    } else {
        best.status = have_solution ? SolveStatus::optimal : SolveStatus::infeasible;
    }
    if (!have_solution) best.assignment.clear();
    best.stats.nodes_explored = nodes_explored;
    best.stats.simplex_iterations = total_iterations;
    best.stats.wall_seconds = elapsed();
    return best;
}

}  // namespace decpomdp
