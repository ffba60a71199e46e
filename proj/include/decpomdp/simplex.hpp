#pragma once

#include <memory>

#include "decpomdp/program.hpp"

namespace decpomdp {

enum class PivotRule { dantzig, bland };

struct SimplexOptions {
    PivotRule rule = PivotRule::dantzig;
    long max_iterations = 200000000;
    /// Programs with fewer variables than this use the full dense tableau;
    /// larger ones use the revised simplex with a dense basis inverse over
    /// sparse columns.
    int dense_threshold = 5000;
    int refactor_interval = 0;  // 0 = pick from the row count
};

/// Snapshot of an optimal basis, reusable as a warm start after bound
/// changes (the engine column layout depends only on which bounds are
/// finite, which branch-and-bound never changes).
struct WarmBasis {
    std::vector<int> basis;
    std::vector<unsigned char> vstat;
    bool valid = false;
};

/// Reusable solver workspace bound to one program: the standardized column
/// skeleton is built once, so branch-and-bound nodes only pay for bound
/// changes and pivots.
class PreparedLp {
  public:
    PreparedLp(const MixedIntegerProgram& prog, const SimplexOptions& options = {});
    ~PreparedLp();
    PreparedLp(PreparedLp&&) noexcept;
    PreparedLp& operator=(PreparedLp&&) noexcept;

    /// Solves with optional bound overrides (empty = program bounds). A valid
    /// `warm` basis is repaired with the dual simplex instead of a cold
    /// two-phase start; `out_basis` receives the final basis when given.
    SolveReport solve(const std::vector<double>& lower_override,
                      const std::vector<double>& upper_override,
                      const WarmBasis* warm = nullptr, WarmBasis* out_basis = nullptr);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Solves the LP relaxation of `prog` (integrality ignored) with a two-phase
/// bounded-variable primal simplex. Bland's rule engages after
/// 10*(rows+cols) iterations. Free variables are split into nonnegative
/// differences at the engine boundary.
SolveReport solve_lp(const MixedIntegerProgram& prog, const SimplexOptions& options = {});

SolveReport solve_lp(const MixedIntegerProgram& prog, const SimplexOptions& options,
                     const std::vector<double>& lower_override,
                     const std::vector<double>& upper_override,
                     const WarmBasis* warm = nullptr, WarmBasis* out_basis = nullptr);

}  // namespace decpomdp
