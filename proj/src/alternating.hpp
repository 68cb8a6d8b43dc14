#pragma once

// Shared alternating minimization used by the planar and the slab solvers.

#include "thinfilm/solve2d.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>

namespace thinfilm::detail {

/// Interface graph: link l joins cells a[l], b[l] with weight w[l].
struct SwapGraph {
  std::vector<int> a, b;
  std::vector<double> weight;
  std::vector<std::vector<int>> incident;
};

/// Best-partner swap passes over the phase-1 cells in seeded random order.
/// `one` and `two` hold each cell's bulk energy in either phase with u fixed.
inline SwapStats swap_descent(const std::vector<double>& one, const std::vector<double>& two, const SwapGraph& graph,
                              std::vector<std::uint8_t>& chi, std::uint64_t seed) {
  const int n = static_cast<int>(chi.size());
  SwapStats stats;
  double scale = 1.0;
  for (int c = 0; c < n; ++c) scale += std::abs(one[c]) + std::abs(two[c]);
  for (double w : graph.weight) scale += std::abs(w);
  const double tol = 1e-13 * scale;

  auto flip_delta = [&](int c, std::uint8_t value) {
    double d = 0.0;
    for (int l : graph.incident[c]) {
      const int other = graph.a[l] == c ? graph.b[l] : graph.a[l];
      d += graph.weight[l] * (static_cast<int>(value != chi[other]) - static_cast<int>(chi[c] != chi[other]));
    }
    return d;
  };

  SplitMix64 rng(seed);
  std::vector<int> order;
  for (int pass = 0; pass < 10 * n + 10; ++pass) {
    ++stats.passes;
    order.clear();
    for (int c = 0; c < n; ++c)
      if (chi[c]) order.push_back(c);
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);

    int accepted = 0;
    for (int i : order) {
      if (!chi[i]) continue;
      const double leave = (two[i] - one[i]) + flip_delta(i, 0);
      chi[i] = 0;
      double best = std::numeric_limits<double>::infinity();
      int partner = -1;
      for (int j = 0; j < n; ++j) {
        if (chi[j] || j == i) continue;
        const double d = leave + (one[j] - two[j]) + flip_delta(j, 1);
        if (d < best) {
          best = d;
          partner = j;
        }
      }
      if (partner >= 0 && best < -tol) {
        chi[partner] = 1;
        ++accepted;
        stats.energy_change += best;
      } else {
        chi[i] = 1;
      }
    }
    stats.accepted += accepted;
    if (accepted == 0) break;
  }
  return stats;
}

inline std::uint64_t label_seed(const std::string& label) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Model interface expected by alternate():
///   std::size_t cells() const;
///   EnergyBreakdown energy(const PhaseField&, const Displacement&) const;
///   DisplacementResult minimize(const PhaseField&, const Displacement* u0) const;
///   PhaseField swap(const Displacement&, const PhaseField&, std::uint64_t seed, SwapStats*) const;
template <class Model>
SolveResult alternate(const Model& model, const SolveOptions& options) {
  const std::size_t n = model.cells();
  const std::size_t k = required_ones(n, options.target_fraction);
  for (const DesignState& w : options.warm_starts)
    if (w.chi.values.size() != n || w.chi.ones() != k)
      throw DomainError("warm start does not match the mesh or the target fraction");

  SolveResult result;
  result.energy.total = std::numeric_limits<double>::infinity();

  const bool exhaustive = options.exhaustive == ExhaustiveMode::On || (options.exhaustive == ExhaustiveMode::Auto && n <= 16);
  if (exhaustive) {
    if (n > 24) throw DomainError("exhaustive layout search is limited to 24 cells");
    result.exhaustive = true;
    PhaseField chi;
    chi.values.assign(n, 0);
    std::uint32_t mask = k == 0 ? 0u : (k >= 32 ? ~0u : (1u << k) - 1u);
    const std::uint64_t end = std::uint64_t{1} << n;
    std::size_t layouts = 0;
    while (mask < end) {
      for (std::size_t c = 0; c < n; ++c) chi.values[c] = (mask >> c) & 1u;
      DisplacementResult r = model.minimize(chi, nullptr);
      ++layouts;
      if (r.energy.total < result.energy.total) {
        result.energy = r.energy;
        result.state = {chi, std::move(r.u)};
      }
      if (mask == 0) break;
      // Next integer with the same number of set bits.
      const std::uint32_t low = mask & (~mask + 1u);
      const std::uint64_t ripple = std::uint64_t{mask} + low;
      if (ripple >= end) break;
      const std::uint32_t r32 = static_cast<std::uint32_t>(ripple);
      mask = r32 | (((mask ^ r32) >> 2) / low);
    }
    result.restarts.push_back({"exhaustive", result.energy.total, static_cast<int>(layouts), 0});
    return result;
  }

  struct Start {
    std::string label;
    DesignState state;
    bool has_u;
  };
  std::vector<Start> starts;
  for (std::size_t w = 0; w < options.warm_starts.size(); ++w)
    starts.push_back({"warm:" + std::to_string(w), options.warm_starts[w], true});
  for (std::uint64_t seed : options.seeds)
    starts.push_back({"seed:" + std::to_string(seed), {random_phase(n, options.target_fraction, seed), {}}, false});

  for (Start& start : starts) {
    PhaseField chi = std::move(start.state.chi);
    DisplacementResult current = model.minimize(chi, start.has_u ? &start.state.u : nullptr);
    RestartRecord record{start.label, current.energy.total, 0, 0};
    const std::uint64_t sweep_seed = label_seed(start.label);
    for (int round = 0; round < options.alternations; ++round) {
      ++record.alternations;
      SwapStats stats;
      PhaseField next = model.swap(current.u, chi, sweep_seed + static_cast<std::uint64_t>(round), &stats);
      record.swaps += stats.accepted;
      if (stats.accepted == 0) break;
      chi = std::move(next);
      const double before = current.energy.total + stats.energy_change;
      current = model.minimize(chi, &current.u);
      if (before - current.energy.total - stats.energy_change <= options.tol) break;
    }
    record.total = current.energy.total;
    result.restarts.push_back(record);
    if (current.energy.total < result.energy.total) {
      result.energy = current.energy;
      result.state = {std::move(chi), std::move(current.u)};
    }
  }
  return result;
}

}  // namespace thinfilm::detail
