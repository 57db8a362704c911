// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The railrelay Authors

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "railrelay/scenario.hpp"
#include "railrelay/traffic.hpp"

namespace railrelay {

/// How the per-segment budget constraints enter the augmented Lagrangian.
///
/// `Equality` imposes sum_i P_ij = P_T for every segment. `Inequality`
/// imposes sum_i P_ij <= P_T through the Powell-Hestenes-Rockafellar form of
/// the same penalty; the data constraint D = D_min is an equality in both.
enum class BudgetMode { Inequality, Equality };

const char* to_string(BudgetMode mode);

struct SolverOptions {
    double sigma0 = 1.0;   // initial penalty factor
    double growth = 4.0;   // penalty growth factor, > 1
    /// Fixed inner stepsize. Unset selects backtracking: the step starts at 1
    /// and is halved until phi decreases.
    std::optional<double> fixed_step;
    double eps = 1e-4;     // on normalised residuals and inner gradient
    int max_cycles = 100;
    int max_inner = 5000;
    BudgetMode budget = BudgetMode::Inequality;

    void validate() const;
};

/// Lagrange multipliers (index 0: data constraint, 1..S: segment budgets),
/// penalty factor, and the penalty factor of the previous cycle.
struct MultiplierState {
    std::vector<double> lambda;
    double sigma = 1.0;
    double sigma_prev = 1.0;

    static MultiplierState initial(int segments, double sigma0);
};

/// h[0] = D - D_min, h[j] = sum_i P_{i,j-1} - P_T.
struct ConstraintResiduals {
    std::vector<double> h;

    double inf_norm() const;
};

/// Units in which the solver works: powers over `power`, data over `data`,
/// energy over `energy`. Identity scaling gives the physical functions.
struct Scaling {
    double power = 1.0;
    double data = 1.0;
    double energy = 1.0;

    /// P_T, D_min (or the average scheme's data when D_min is 0), P_T * T.
    static Scaling normalized(const ScenarioConfig& cfg, const SegmentSchedule& sched, double d_min);
};

/// Data floor from the scenario's policy: an explicit value, or rho times the
/// data the average allocation delivers.
double data_floor(const ScenarioConfig& cfg, const SegmentSchedule& sched);

ConstraintResiduals constraint_residuals(const AllocationMatrix& p, const ScenarioConfig& cfg,
                                         const SegmentSchedule& sched, double d_min);

/// phi = E - lambda^T h + sigma h^T h in physical units (Equality mode); the
/// budget terms take the PHR form in Inequality mode.
double augmented_lagrangian(const AllocationMatrix& p, const std::vector<double>& lambda, double sigma,
                            const ScenarioConfig& cfg, const SegmentSchedule& sched, double d_min,
                            BudgetMode mode = BudgetMode::Equality);

AllocationMatrix grad_augmented_lagrangian(const AllocationMatrix& p, const std::vector<double>& lambda,
                                           double sigma, const ScenarioConfig& cfg,
                                           const SegmentSchedule& sched, double d_min,
                                           BudgetMode mode = BudgetMode::Equality);

/// The augmented Lagrangian of one scenario in a given scaling. Variables are
/// x = P / scaling.power; the channel quadrature is tabulated once.
class AugmentedLagrangian {
public:
    AugmentedLagrangian(const ScenarioConfig& cfg, const SegmentSchedule& sched, double d_min, Scaling scaling,
                        BudgetMode mode);

    const Scaling& scaling() const noexcept { return scaling_; }
    BudgetMode mode() const noexcept { return mode_; }
    double d_min() const noexcept { return d_min_; }
    int constraints() const noexcept { return static_cast<int>(durations_.size()) + 1; }

    AllocationMatrix to_scaled(const AllocationMatrix& p) const { return p.scaled(1.0 / scaling_.power); }
    AllocationMatrix to_physical(const AllocationMatrix& x) const { return x.scaled(scaling_.power); }

    double energy(const AllocationMatrix& x) const;  // scaled
    double data(const AllocationMatrix& x) const;    // bits
    ConstraintResiduals residuals(const AllocationMatrix& x) const;

    double value(const AllocationMatrix& x, const std::vector<double>& lambda, double sigma) const;
    AllocationMatrix gradient(const AllocationMatrix& x, const std::vector<double>& lambda, double sigma) const;

    /// Feasibility measure driving the penalty/multiplier rules. Equal to h in
    /// Equality mode; budget entries become max(h_j, lambda_j / (2 sigma)).
    std::vector<double> progress_residuals(const ConstraintResiduals& h, const std::vector<double>& lambda,
                                           double sigma) const;

    /// First-order multiplier update lambda - 2 sigma h, with budget entries
    /// kept nonpositive in Inequality mode.
    std::vector<double> corrected_multipliers(const ConstraintResiduals& h, const std::vector<double>& lambda,
                                              double sigma) const;

private:
    ScenarioConfig cfg_;
    std::vector<double> durations_;
    ChannelTable table_;
    double d_min_;
    Scaling scaling_;
    BudgetMode mode_;
};

/// Negative gradient with components zeroed where x = 0 and the gradient
/// pushes below zero.
AllocationMatrix projected_descent(const AllocationMatrix& x, const AllocationMatrix& grad);

struct InnerResult {
    AllocationMatrix x;
    int iterations = 0;
    bool converged = false;  // ||d||_inf <= eps reached
    bool monotone = true;    // phi never increased
    double phi_start = 0.0;
    double phi_end = 0.0;
};

/// Projected gradient descent on phi(., lambda, sigma) from x0.
InnerResult inner_descent(const AugmentedLagrangian& model, const AllocationMatrix& x0,
                          const std::vector<double>& lambda, double sigma, const SolverOptions& opts);

enum class UpdateCase {
    Terminate,          // max residual <= eps
    PenaltyDiverging,   // ||h|| did not shrink: sigma grows
    CorrectMultipliers, // sigma grew last cycle, or ||h|| fell below a quarter
    PenaltySlow,        // modest progress with a flat sigma: sigma grows
    ResumeInner,        // feasible, but the inner solve hit its cap: state kept
};

const char* to_string(UpdateCase c);

/// Penalty/multiplier rule applied after each inner solve. `progress` holds
/// the progress residuals of the new iterate, `h_prev_norm` the inf-norm of
/// the previous cycle's, and `h` the raw residuals used for the correction
/// lambda <- lambda - 2 sigma h.
UpdateCase update_state(MultiplierState& state, const std::vector<double>& progress, double h_prev_norm,
                        const ConstraintResiduals& h, const SolverOptions& opts);

struct CycleRecord {
    int cycle = 0;
    UpdateCase action = UpdateCase::Terminate;
    double residual = 0.0;  // progress residual, inf-norm
    double sigma = 0.0;     // penalty factor used in this cycle
    double phi = 0.0;
    double energy = 0.0;    // J
    int inner_iterations = 0;
    bool inner_converged = false;
};

struct SolveResult {
    AllocationMatrix power;        // W
    bool converged = false;
    bool monotone = true;
    int cycles = 0;
    double d_min = 0.0;
    double residual = 0.0;         // progress residual of `power`
    double sigma = 0.0;
    /// Multiplier estimate at `power` in normalised units.
    std::vector<double> multipliers;
    double kkt = 0.0;
    std::vector<CycleRecord> history;
};

/// Minimum-energy allocation meeting the data floor under the per-segment
/// budget. Throws InfeasibleError when D_min exceeds the data of the
/// full-budget average allocation.
SolveResult solve(const ScenarioConfig& cfg, const SegmentSchedule& sched, const AllocationMatrix& init,
                  const SolverOptions& opts = {}, std::optional<double> d_min = std::nullopt);

SolveResult solve(const ScenarioConfig& cfg, const SegmentSchedule& sched, const SolverOptions& opts = {});

/// First-order optimality residual in normalised units. `lambda` follows the
/// solver's convention (phi = E - lambda^T h), so for the inequality program
/// lambda_0 >= 0 and the budget entries are <= 0. Combines projected
/// stationarity, primal violation, complementary slackness and multiplier
/// sign violations; the maximum is returned.
double kkt_residual(const AllocationMatrix& p, const std::vector<double>& lambda, const ScenarioConfig& cfg,
                    const SegmentSchedule& sched, double d_min, BudgetMode mode = BudgetMode::Inequality);

}  // namespace railrelay
