#pragma once

#include <cstddef>
#include <vector>

namespace mixlab::lp {

enum class Sense { le, eq, ge };

struct Term {
  std::size_t var;
  double coef;
};

/// Minimize c^T x subject to row constraints, x_j >= 0 or free.
class LinearProgram {
 public:
  std::size_t add_variable(double cost, bool free = false);
  std::size_t add_constraint(std::vector<Term> terms, Sense sense, double rhs);

  std::size_t num_variables() const { return cost_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }

  struct Row {
    std::vector<Term> terms;
    Sense sense;
    double rhs;
  };

  const std::vector<double>& costs() const { return cost_; }
  const std::vector<char>& free_flags() const { return free_; }
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<double> cost_;
  std::vector<char> free_;
  std::vector<Row> rows_;
};

struct SimplexOptions {
  long max_iterations = 200000;
  int refactor_every = 64;
  // Consecutive non-improving pivots before switching to Bland's rule.
  int stall_limit = 50;
};

/// Primal solution with the dual certificate computed from the final basis.
/// Duals follow the convention reduced cost c_j - A_j^T y >= 0 at optimality;
/// they are <= 0 on `le` rows and >= 0 on `ge` rows.
struct Solution {
  double objective = 0.0;
  double dual_objective = 0.0;
  std::vector<double> x;
  std::vector<double> duals;
  long iterations = 0;
  long bland_pivots = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  double complementary_slackness = 0.0;
};

/// Throws SolverError on infeasibility, unboundedness or the iteration cap.
Solution solve(const LinearProgram& program, const SimplexOptions& options = {});

}  // namespace mixlab::lp
