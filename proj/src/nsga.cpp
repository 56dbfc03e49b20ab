#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hydrocal/error.hpp"
#include "hydrocal/nsga.hpp"

namespace hydrocal {

namespace {

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool strict = false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

}  // namespace

std::vector<size_t> pareto_filter(const std::vector<std::vector<double>>& points) {
  std::vector<size_t> kept;
  for (size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (size_t j = 0; j < points.size() && !dominated; ++j)
      if (j != i && (dominates(points[j], points[i]) ||
                     (points[j] == points[i] && j < i)))  // duplicates: keep the first
        dominated = true;
    if (!dominated) kept.push_back(i);
  }
  return kept;
}

namespace {

struct Individual {
  std::vector<double> genes;
  std::vector<double> objectives;
  int rank = 0;
  double crowding = 0;
};

std::vector<std::vector<int>> fast_non_dominated_sort(std::vector<Individual>& pop) {
  const int n = static_cast<int>(pop.size());
  std::vector<std::vector<int>> dominated_by(n);
  std::vector<int> domination_count(n, 0);
  std::vector<std::vector<int>> fronts(1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (dominates(pop[i].objectives, pop[j].objectives)) dominated_by[i].push_back(j);
      else if (dominates(pop[j].objectives, pop[i].objectives)) ++domination_count[i];
    }
    if (domination_count[i] == 0) {
      pop[i].rank = 0;
      fronts[0].push_back(i);
    }
  }
  int level = 0;
  while (!fronts[level].empty()) {
    std::vector<int> next;
    for (int i : fronts[level])
      for (int j : dominated_by[i])
        if (--domination_count[j] == 0) {
          pop[j].rank = level + 1;
          next.push_back(j);
        }
    fronts.push_back(std::move(next));
    ++level;
  }
  fronts.pop_back();
  return fronts;
}

void assign_crowding(std::vector<Individual>& pop, const std::vector<int>& front) {
  const size_t m = pop[front[0]].objectives.size();
  for (int i : front) pop[i].crowding = 0;
  for (size_t obj = 0; obj < m; ++obj) {
    std::vector<int> order = front;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return pop[a].objectives[obj] < pop[b].objectives[obj];
    });
    const double lo = pop[order.front()].objectives[obj];
    const double hi = pop[order.back()].objectives[obj];
    pop[order.front()].crowding = std::numeric_limits<double>::infinity();
    pop[order.back()].crowding = std::numeric_limits<double>::infinity();
    if (hi - lo <= 0) continue;
    for (size_t k = 1; k + 1 < order.size(); ++k)
      pop[order[k]].crowding +=
          (pop[order[k + 1]].objectives[obj] - pop[order[k - 1]].objectives[obj]) / (hi - lo);
  }
}

bool crowded_less(const Individual& a, const Individual& b) {
  return a.rank != b.rank ? a.rank < b.rank : a.crowding > b.crowding;
}

}  // namespace

ParetoSet nsga_optimize(const MultiObjective& objectives, int n_objectives,
                        const std::vector<double>& lower, const std::vector<double>& upper,
                        uint64_t seed, const NsgaOptions& options) {
  const size_t n_genes = lower.size();
  if (upper.size() != n_genes || n_genes == 0)
    fail(ErrorCode::InvalidArgument, "bounds size mismatch");
  const double mutation_rate =
      options.mutation_rate > 0 ? options.mutation_rate : 1.0 / n_genes;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  size_t evaluations = 0;

  auto evaluate = [&](Individual& ind) {
    ind.objectives = objectives(ind.genes);
    ++evaluations;
    if (static_cast<int>(ind.objectives.size()) != n_objectives)
      fail(ErrorCode::InvalidArgument, "objective arity mismatch");
  };

  std::vector<Individual> pop(options.population);
  for (auto& ind : pop) {
    ind.genes.resize(n_genes);
    for (size_t i = 0; i < n_genes; ++i)
      ind.genes[i] = lower[i] + unit(rng) * (upper[i] - lower[i]);
    evaluate(ind);
  }
  {
    auto fronts = fast_non_dominated_sort(pop);
    for (auto& front : fronts) assign_crowding(pop, front);
  }

  auto tournament = [&](const std::vector<Individual>& p) -> const Individual& {
    std::uniform_int_distribution<size_t> pick(0, p.size() - 1);
    const Individual& a = p[pick(rng)];
    const Individual& b = p[pick(rng)];
    return crowded_less(a, b) ? a : b;
  };

  auto sbx = [&](const Individual& pa, const Individual& pb, Individual& ca, Individual& cb) {
    ca.genes = pa.genes;
    cb.genes = pb.genes;
    if (unit(rng) > options.crossover_rate) return;
    for (size_t i = 0; i < n_genes; ++i) {
      if (unit(rng) > 0.5) continue;
      const double x1 = pa.genes[i], x2 = pb.genes[i];
      if (std::abs(x1 - x2) < 1e-14) continue;
      const double u = unit(rng);
      const double beta = u <= 0.5 ? std::pow(2 * u, 1.0 / (options.crossover_eta + 1))
                                   : std::pow(1.0 / (2 * (1 - u)), 1.0 / (options.crossover_eta + 1));
      double c1 = 0.5 * ((1 + beta) * x1 + (1 - beta) * x2);
      double c2 = 0.5 * ((1 - beta) * x1 + (1 + beta) * x2);
      ca.genes[i] = std::clamp(c1, lower[i], upper[i]);
      cb.genes[i] = std::clamp(c2, lower[i], upper[i]);
    }
  };

  auto mutate = [&](Individual& ind) {
    for (size_t i = 0; i < n_genes; ++i) {
      if (unit(rng) > mutation_rate) continue;
      const double u = unit(rng);
      const double delta = u < 0.5 ? std::pow(2 * u, 1.0 / (options.mutation_eta + 1)) - 1
                                   : 1 - std::pow(2 * (1 - u), 1.0 / (options.mutation_eta + 1));
      ind.genes[i] =
          std::clamp(ind.genes[i] + delta * (upper[i] - lower[i]), lower[i], upper[i]);
    }
  };

  for (int gen = 0; gen < options.generations; ++gen) {
    std::vector<Individual> offspring;
    offspring.reserve(options.population);
    while (static_cast<int>(offspring.size()) < options.population) {
      Individual ca, cb;
      sbx(tournament(pop), tournament(pop), ca, cb);
      mutate(ca);
      mutate(cb);
      evaluate(ca);
      offspring.push_back(std::move(ca));
      if (static_cast<int>(offspring.size()) < options.population) {
        evaluate(cb);
        offspring.push_back(std::move(cb));
      }
    }
    // Elitist environmental selection over parents + offspring.
    std::vector<Individual> merged = std::move(pop);
    for (auto& ind : offspring) merged.push_back(std::move(ind));
    auto fronts = fast_non_dominated_sort(merged);
    for (auto& front : fronts) assign_crowding(merged, front);
    std::vector<Individual> next;
    next.reserve(options.population);
    for (auto& front : fronts) {
      if (static_cast<int>(next.size() + front.size()) <= options.population) {
        for (int i : front) next.push_back(merged[i]);
      } else {
        std::sort(front.begin(), front.end(),
                  [&](int a, int b) { return merged[a].crowding > merged[b].crowding; });
        for (int i : front) {
          if (static_cast<int>(next.size()) >= options.population) break;
          next.push_back(merged[i]);
        }
      }
      if (static_cast<int>(next.size()) >= options.population) break;
    }
    pop = std::move(next);
  }

  std::vector<std::vector<double>> final_points;
  for (const auto& ind : pop) final_points.push_back(ind.objectives);
  ParetoSet archive;
  for (size_t idx : pareto_filter(final_points))
    archive.solutions.push_back({pop[idx].genes, pop[idx].objectives});
  archive.generations = options.generations;
  archive.evaluations = evaluations;
  return archive;
}

size_t saw_select(const std::vector<std::vector<double>>& front, size_t constrained) {
  if (front.empty()) fail(ErrorCode::EmptyFront, "SAW selection over an empty front");
  const size_t m = front.size();
  const size_t n = front[0].size();
  if (constrained >= n) fail(ErrorCode::InvalidArgument, "constrained column out of range");

  std::vector<double> f_max(n, -1e300), f_min(n, 1e300);
  for (const auto& row : front)
    for (size_t j = 0; j < n; ++j) {
      f_max[j] = std::max(f_max[j], row[j]);
      f_min[j] = std::min(f_min[j], row[j]);
    }
  const double d = f_max[constrained] - f_min[constrained];
  double best_score = -1e300;
  size_t best = 0;
  for (size_t i = 0; i < m; ++i) {
    double score = 0;
    for (size_t j = 0; j < n; ++j) {
      const double range = f_max[j] - f_min[j];
      const double normalized = range > 0 ? (f_max[j] - front[i][j]) / range : 0.0;
      const double weight = j == constrained ? std::exp(d) : std::exp(1.0) - std::exp(d);
      score += weight * normalized;
    }
    if (score > best_score) {  // ties keep the lowest index
      best_score = score;
      best = i;
    }
  }
  return best;
}

}  // namespace hydrocal
