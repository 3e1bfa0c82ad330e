#pragma once

#include <string>
#include <vector>

#include "rdlab/harness/config.hpp"
#include "rdlab/harness/report.hpp"

namespace rdlab::harness {

/// Semigroup, generator and fractional-norm distances between A and each
/// family member, for a dictionary of data.
ConvergenceReport exp_semigroup(const ExperimentConfig& config);

/// Pairwise truncation agreement, ladder bookkeeping and maximal-solution
/// assembly on a bounded and an explosive battery.
ConvergenceReport exp_truncation(const ExperimentConfig& config);

/// Stopping-time sandwich fractions and coupled distances per family index.
ConvergenceReport exp_sandwich(const ExperimentConfig& config);

/// Explosion frequencies and moment bounds across datum scales, plus the
/// explosive control.
ConvergenceReport exp_global(const ExperimentConfig& config);

/// Coupled and decoupled path distances for the joint family.
ConvergenceReport exp_path_convergence(const ExperimentConfig& config);

/// Deterministic lemma battery: growth bound, dissipative bound, comparison
/// and the constant derivations.
ConvergenceReport exp_lemmas(const ExperimentConfig& config);

/// Dispatch on config.experiment.
ConvergenceReport run_experiment(const ExperimentConfig& config);

/// Linear-interpolation quantile (sorts a copy).
double quantile(std::vector<double> values, double q);

/// Forcings of the lemma battery: zero, a constant, a space-time field.
Vector battery_forcing(const std::string& name, double t, GridSpec grid);

}  // namespace rdlab::harness
