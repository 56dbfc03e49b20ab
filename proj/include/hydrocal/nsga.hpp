#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace hydrocal {

/// Exact non-dominated subset, stable input order among survivors.
std::vector<size_t> pareto_filter(const std::vector<std::vector<double>>& points);

struct NsgaOptions {
  int population = 64;
  int generations = 100;
  double crossover_rate = 0.9;
  double crossover_eta = 15.0;  // simulated binary crossover
  double mutation_eta = 20.0;   // polynomial mutation
  double mutation_rate = -1;    // default 1/n_genes
};

struct ParetoSolution {
  std::vector<double> genes;
  std::vector<double> objectives;
};

struct ParetoSet {
  std::vector<ParetoSolution> solutions;  // mutually non-dominated
  int generations = 0;
  size_t evaluations = 0;
};

using MultiObjective = std::function<std::vector<double>(const std::vector<double>&)>;

/// Elitist NSGA-II: fast non-dominated sort, crowding distance, binary
/// tournament, SBX crossover, polynomial mutation. Deterministic per seed.
ParetoSet nsga_optimize(const MultiObjective& objectives, int n_objectives,
                        const std::vector<double>& lower, const std::vector<double>& upper,
                        uint64_t seed, const NsgaOptions& options = {});

/// Simple additive weighting selection from a Pareto front. `constrained`
/// indexes the dominant objective column; weights are e^d for it and e − e^d
/// for the rest, with d the column range. Returns the archive index.
size_t saw_select(const std::vector<std::vector<double>>& front, size_t constrained);

}  // namespace hydrocal
