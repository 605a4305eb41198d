#include "mixlab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mixlab/error.hpp"

namespace mixlab::lp {

std::size_t LinearProgram::add_variable(double cost, bool free) {
  if (!std::isfinite(cost)) throw ConfigError("LP cost must be finite");
  cost_.push_back(cost);
  free_.push_back(free ? 1 : 0);
  return cost_.size() - 1;
}

std::size_t LinearProgram::add_constraint(std::vector<Term> terms, Sense sense,
                                          double rhs) {
  for (const auto& t : terms)
    if (t.var >= cost_.size()) throw DimensionError("LP term references unknown variable");
  if (!std::isfinite(rhs)) throw ConfigError("LP right-hand side must be finite");
  rows_.push_back({std::move(terms), sense, rhs});
  return rows_.size() - 1;
}

namespace {

enum class ColumnKind { structural_plus, structural_minus, slack, artificial };

// Equality-form problem min c^T z, A z = b, z >= 0, b >= 0, with A in
// compressed-column storage. Rows are sign-normalized so b >= 0.
struct StandardForm {
  std::size_t rows = 0;
  std::vector<std::size_t> col_start{0};
  std::vector<std::size_t> row_index;
  std::vector<double> value;
  std::vector<double> cost;
  std::vector<ColumnKind> kind;
  std::vector<std::size_t> origin;  // user variable or row of a slack
  std::vector<double> rhs;
  std::vector<double> row_sign;
  std::vector<std::size_t> initial_basis;

  std::size_t cols() const { return cost.size(); }

  void add_column(std::vector<std::pair<std::size_t, double>> entries, double c,
                  ColumnKind k, std::size_t from) {
    for (const auto& [r, v] : entries) {
      if (v == 0.0) continue;
      row_index.push_back(r);
      value.push_back(v);
    }
    col_start.push_back(row_index.size());
    cost.push_back(c);
    kind.push_back(k);
    origin.push_back(from);
  }
};

StandardForm to_standard_form(const LinearProgram& lp) {
  StandardForm sf;
  const auto& rows = lp.rows();
  sf.rows = rows.size();
  sf.rhs.resize(sf.rows);
  sf.row_sign.resize(sf.rows);
  for (std::size_t r = 0; r < sf.rows; ++r) {
    sf.row_sign[r] = rows[r].rhs < 0.0 ? -1.0 : 1.0;
    sf.rhs[r] = sf.row_sign[r] * rows[r].rhs;
  }

  std::vector<std::vector<std::pair<std::size_t, double>>> by_var(lp.num_variables());
  for (std::size_t r = 0; r < sf.rows; ++r)
    for (const auto& t : rows[r].terms)
      by_var[t.var].push_back({r, sf.row_sign[r] * t.coef});
  for (auto& entries : by_var) {
    std::sort(entries.begin(), entries.end());
    std::vector<std::pair<std::size_t, double>> merged;
    for (const auto& e : entries) {
      if (!merged.empty() && merged.back().first == e.first)
        merged.back().second += e.second;
      else
        merged.push_back(e);
    }
    entries.swap(merged);
  }

  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    sf.add_column(by_var[j], lp.costs()[j], ColumnKind::structural_plus, j);
    if (lp.free_flags()[j]) {
      auto negated = by_var[j];
      for (auto& e : negated) e.second = -e.second;
      sf.add_column(std::move(negated), -lp.costs()[j],
                    ColumnKind::structural_minus, j);
    }
  }

  sf.initial_basis.assign(sf.rows, std::numeric_limits<std::size_t>::max());
  for (std::size_t r = 0; r < sf.rows; ++r) {
    if (rows[r].sense == Sense::eq) continue;
    const double coef = (rows[r].sense == Sense::le ? 1.0 : -1.0) * sf.row_sign[r];
    sf.add_column({{r, coef}}, 0.0, ColumnKind::slack, r);
    if (coef > 0.0) sf.initial_basis[r] = sf.cols() - 1;
  }
  for (std::size_t r = 0; r < sf.rows; ++r) {
    if (sf.initial_basis[r] != std::numeric_limits<std::size_t>::max()) continue;
    sf.add_column({{r, 1.0}}, 0.0, ColumnKind::artificial, r);
    sf.initial_basis[r] = sf.cols() - 1;
  }
  return sf;
}

class RevisedSimplex {
 public:
  RevisedSimplex(const StandardForm& sf, const SimplexOptions& options)
      : sf_(sf),
        options_(options),
        m_(static_cast<Eigen::Index>(sf.rows)),
        basis_(sf.initial_basis),
        in_basis_(sf.cols(), -1),
        barred_(sf.cols(), 0),
        binv_(Eigen::MatrixXd::Identity(m_, m_)),
        xb_(m_) {
    for (Eigen::Index r = 0; r < m_; ++r) {
      in_basis_[basis_[r]] = r;
      xb_(r) = sf.rhs[r];
    }
    // Initial basis columns are +e_r, so B = I.
  }

  // Phase 1 then phase 2.
  void run() {
    bool has_artificial = false;
    for (auto k : sf_.kind) has_artificial |= k == ColumnKind::artificial;
    if (has_artificial) {
      std::vector<double> phase1(sf_.cols(), 0.0);
      for (std::size_t j = 0; j < sf_.cols(); ++j)
        if (sf_.kind[j] == ColumnKind::artificial) phase1[j] = 1.0;
      optimize(phase1);
      double infeasibility = 0.0;
      for (Eigen::Index r = 0; r < m_; ++r)
        if (sf_.kind[basis_[r]] == ColumnKind::artificial) infeasibility += xb_(r);
      double scale = 1.0;
      for (double b : sf_.rhs) scale = std::max(scale, std::abs(b));
      if (infeasibility > 1e-9 * scale)
        throw SolverError("LP is infeasible (phase 1 residual " +
                              std::to_string(infeasibility) + ")",
                          iterations_);
      for (std::size_t j = 0; j < sf_.cols(); ++j)
        if (sf_.kind[j] == ColumnKind::artificial) barred_[j] = 1;
      drive_out_artificials();
    }
    optimize(sf_.cost);
    polish();
  }

  std::vector<double> primal() const {
    std::vector<double> z(sf_.cols(), 0.0);
    for (Eigen::Index r = 0; r < m_; ++r) z[basis_[r]] = std::max(xb_(r), 0.0);
    return z;
  }

  // Duals of the sign-normalized rows for the phase-2 costs.
  Eigen::VectorXd duals() const {
    Eigen::VectorXd cb(m_);
    for (Eigen::Index r = 0; r < m_; ++r) cb(r) = sf_.cost[basis_[r]];
    return y_.size() == m_ ? y_ : Eigen::VectorXd(binv_.transpose() * cb);
  }

  long iterations() const { return iterations_; }
  long bland_pivots() const { return bland_pivots_; }

 private:
  Eigen::VectorXd column(std::size_t j) const {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m_);
    for (std::size_t k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k)
      u += sf_.value[k] * binv_.col(static_cast<Eigen::Index>(sf_.row_index[k]));
    return u;
  }

  double reduced_cost(std::size_t j, const std::vector<double>& cost,
                      const Eigen::VectorXd& y) const {
    double d = cost[j];
    for (std::size_t k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k)
      d -= sf_.value[k] * y(static_cast<Eigen::Index>(sf_.row_index[k]));
    return d;
  }

  void refactor() {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
    for (Eigen::Index r = 0; r < m_; ++r) {
      const auto j = basis_[r];
      for (std::size_t k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k)
        b(static_cast<Eigen::Index>(sf_.row_index[k]), r) = sf_.value[k];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    binv_ = lu.inverse();
    Eigen::VectorXd rhs(m_);
    for (Eigen::Index r = 0; r < m_; ++r) rhs(r) = sf_.rhs[r];
    xb_ = binv_ * rhs;
    for (Eigen::Index r = 0; r < m_; ++r)
      if (xb_(r) < 0.0 && xb_(r) > -1e-11) xb_(r) = 0.0;
  }

  // Fresh LU of the final basis and one step of iterative refinement for the
  // basic solution and the duals.
  void polish() {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
    for (Eigen::Index r = 0; r < m_; ++r) {
      const auto j = basis_[r];
      for (std::size_t k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k)
        b(static_cast<Eigen::Index>(sf_.row_index[k]), r) = sf_.value[k];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    Eigen::VectorXd rhs(m_), cb(m_);
    for (Eigen::Index r = 0; r < m_; ++r) {
      rhs(r) = sf_.rhs[r];
      cb(r) = sf_.cost[basis_[r]];
    }
    xb_ = lu.solve(rhs);
    xb_ += lu.solve(Eigen::VectorXd(rhs - b * xb_));
    Eigen::PartialPivLU<Eigen::MatrixXd> lut(b.transpose());
    y_ = lut.solve(cb);
    y_ += lut.solve(Eigen::VectorXd(cb - b.transpose() * y_));
  }

  void pivot(Eigen::Index leave_row, std::size_t enter, const Eigen::VectorXd& u) {
    const double theta = std::max(xb_(leave_row), 0.0) / u(leave_row);
    xb_ -= theta * u;
    xb_(leave_row) = theta;
    const Eigen::RowVectorXd pivot_row = binv_.row(leave_row) / u(leave_row);
    binv_ -= u * pivot_row;
    binv_.row(leave_row) = pivot_row;
    in_basis_[basis_[leave_row]] = -1;
    basis_[leave_row] = enter;
    in_basis_[enter] = leave_row;
    ++iterations_;
    if (++since_refactor_ >= options_.refactor_every) {
      refactor();
      since_refactor_ = 0;
    }
  }

  double objective(const std::vector<double>& cost) const {
    double s = 0.0;
    for (Eigen::Index r = 0; r < m_; ++r) s += cost[basis_[r]] * xb_(r);
    return s;
  }

  void optimize(const std::vector<double>& cost) {
    double cost_scale = 1.0;
    for (double c : cost) cost_scale = std::max(cost_scale, std::abs(c));
    const double dual_tol = 1e-11 * cost_scale;
    constexpr double kPivotTol = 1e-9;
    constexpr double kFeasTol = 1e-12;

    bool bland = false;
    int stall = 0;
    double best = objective(cost);
    while (true) {
      if (iterations_ >= options_.max_iterations)
        throw SolverError("simplex iteration cap reached", iterations_);
      Eigen::VectorXd cb(m_);
      for (Eigen::Index r = 0; r < m_; ++r) cb(r) = cost[basis_[r]];
      const Eigen::VectorXd y = binv_.transpose() * cb;

      std::size_t enter = sf_.cols();
      double most_negative = -dual_tol;
      for (std::size_t j = 0; j < sf_.cols(); ++j) {
        if (in_basis_[j] >= 0 || barred_[j]) continue;
        const double d = reduced_cost(j, cost, y);
        if (d < most_negative) {
          enter = j;
          if (bland) break;
          most_negative = d;
        }
      }
      if (enter == sf_.cols()) return;

      const Eigen::VectorXd u = column(enter);
      const double pivot_tol = kPivotTol * std::max(1.0, u.cwiseAbs().maxCoeff());
      // Harris two-pass ratio test: bound the step with a small feasibility
      // allowance, then take the largest pivot among rows within that bound.
      double theta_max = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m_; ++r)
        if (u(r) > pivot_tol)
          theta_max = std::min(theta_max, (std::max(xb_(r), 0.0) + kFeasTol) / u(r));
      Eigen::Index leave = -1;
      for (Eigen::Index r = 0; r < m_; ++r) {
        if (u(r) <= pivot_tol) continue;
        if (std::max(xb_(r), 0.0) / u(r) > theta_max) continue;
        if (leave < 0) {
          leave = r;
          continue;
        }
        const bool better = bland ? basis_[r] < basis_[leave] : u(r) > u(leave);
        if (better) leave = r;
      }
      if (leave < 0) throw SolverError("LP is unbounded", iterations_);

      if (bland) ++bland_pivots_;
      pivot(leave, enter, u);
      const double now = objective(cost);
      if (now < best - 1e-12 * (1.0 + std::abs(best))) {
        best = now;
        stall = 0;
        bland = false;
      } else if (++stall >= options_.stall_limit) {
        bland = true;
      }
    }
  }

  void drive_out_artificials() {
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (sf_.kind[basis_[r]] != ColumnKind::artificial) continue;
      std::size_t enter = sf_.cols();
      double best = 1e-7;
      Eigen::VectorXd best_u;
      for (std::size_t j = 0; j < sf_.cols(); ++j) {
        if (in_basis_[j] >= 0 || barred_[j]) continue;
        double entry = 0.0;
        for (std::size_t k = sf_.col_start[j]; k < sf_.col_start[j + 1]; ++k)
          entry += binv_(r, static_cast<Eigen::Index>(sf_.row_index[k])) * sf_.value[k];
        if (std::abs(entry) > best) {
          best = std::abs(entry);
          enter = j;
        }
      }
      // No candidate: the row is redundant and the artificial stays at zero.
      if (enter == sf_.cols()) continue;
      const Eigen::VectorXd u = column(enter);
      pivot(r, enter, u);
    }
  }

  const StandardForm& sf_;
  SimplexOptions options_;
  Eigen::Index m_;
  std::vector<std::size_t> basis_;
  std::vector<Eigen::Index> in_basis_;
  std::vector<char> barred_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd y_;
  long iterations_ = 0;
  long bland_pivots_ = 0;
  int since_refactor_ = 0;
};

}  // namespace

Solution solve(const LinearProgram& program, const SimplexOptions& options) {
  const auto sf = to_standard_form(program);
  RevisedSimplex simplex(sf, options);
  if (sf.rows > 0) simplex.run();

  Solution out;
  const auto z = sf.rows > 0 ? simplex.primal() : std::vector<double>(sf.cols(), 0.0);
  out.x.assign(program.num_variables(), 0.0);
  for (std::size_t j = 0; j < sf.cols(); ++j) {
    if (sf.kind[j] == ColumnKind::structural_plus) out.x[sf.origin[j]] += z[j];
    if (sf.kind[j] == ColumnKind::structural_minus) out.x[sf.origin[j]] -= z[j];
  }
  out.duals.assign(program.num_constraints(), 0.0);
  if (sf.rows > 0) {
    const auto y = simplex.duals();
    for (std::size_t r = 0; r < sf.rows; ++r)
      out.duals[r] = sf.row_sign[r] * y(static_cast<Eigen::Index>(r));
  }
  out.iterations = simplex.iterations();
  out.bland_pivots = simplex.bland_pivots();

  // Certificate from the original data.
  const auto& rows = program.rows();
  std::vector<double> reduced(program.costs());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    double activity = 0.0;
    for (const auto& t : rows[r].terms) {
      activity += t.coef * out.x[t.var];
      reduced[t.var] -= t.coef * out.duals[r];
    }
    double violation = 0.0;
    switch (rows[r].sense) {
      case Sense::le:
        violation = std::max(0.0, activity - rows[r].rhs);
        out.dual_residual = std::max(out.dual_residual, out.duals[r]);
        break;
      case Sense::ge:
        violation = std::max(0.0, rows[r].rhs - activity);
        out.dual_residual = std::max(out.dual_residual, -out.duals[r]);
        break;
      case Sense::eq:
        violation = std::abs(activity - rows[r].rhs);
        break;
    }
    out.primal_residual = std::max(out.primal_residual, violation);
    out.complementary_slackness = std::max(
        out.complementary_slackness, std::abs(out.duals[r] * (activity - rows[r].rhs)));
    out.dual_objective += rows[r].rhs * out.duals[r];
  }
  for (std::size_t j = 0; j < program.num_variables(); ++j) {
    out.objective += program.costs()[j] * out.x[j];
    if (program.free_flags()[j])
      out.dual_residual = std::max(out.dual_residual, std::abs(reduced[j]));
    else
      out.dual_residual = std::max(out.dual_residual, -reduced[j]);
    out.complementary_slackness =
        std::max(out.complementary_slackness, std::abs(out.x[j] * reduced[j]));
  }
  out.duality_gap = std::abs(out.objective - out.dual_objective);
  return out;
}

}  // namespace mixlab::lp
