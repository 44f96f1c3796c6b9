#include "engage/thurstone.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "engage/error.hpp"
#include "engage/parallel.hpp"

namespace engage {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

struct Edge {
  int a = 0;
  int b = 0;
  double a_wins = 0.0;
  double b_wins = 0.0;
};

struct Component {
  std::vector<int> items;  // global ids
  std::vector<Edge> edges;  // local ids
};

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

double edge_loglik(const Edge& e, double d) {
  double ll = 0.0;
  if (e.a_wins > 0) ll += e.a_wins * log_normal_cdf(d);
  if (e.b_wins > 0) ll += e.b_wins * log_normal_cdf(-d);
  return ll;
}

struct SolveResult {
  std::vector<double> scale;
  int iterations = 0;
  bool converged = false;
};

SolveResult solve_component(const Component& c, const ThurstoneOptions& opt) {
  const std::size_t n = c.items.size();
  std::vector<double> s(n, 0.0), grad(n), precond(n, opt.penalty);
  double total = 0.0;
  for (const auto& e : c.edges) {
    precond[e.a] += e.a_wins + e.b_wins;
    precond[e.b] += e.a_wins + e.b_wins;
    total += e.a_wins + e.b_wins;
  }
  auto objective = [&](const std::vector<double>& x) {
    double ll = 0.0;
    for (const auto& e : c.edges) ll += edge_loglik(e, x[e.a] - x[e.b]);
    double sq = 0.0;
    for (double v : x) sq += v * v;
    return (ll - 0.5 * opt.penalty * sq) / total;
  };

  SolveResult r;
  double current = objective(s);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = -opt.penalty * s[i];
    for (const auto& e : c.edges) {
      double d = s[e.a] - s[e.b];
      double g = e.a_wins * inverse_mills(d) - e.b_wins * inverse_mills(-d);
      grad[e.a] += g;
      grad[e.b] -= g;
    }
    double max_move = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double move = opt.step * grad[i] / precond[i];
      s[i] += move;
      max_move = std::max(max_move, std::abs(move));
    }
    double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
    for (auto& v : s) v -= mean;

    double next = objective(s);
    double gain = next - current;
    current = next;
    r.iterations = it;
    if (gain < opt.tolerance * (1.0 + std::abs(current)) && max_move < 1e-6) {
      r.converged = true;
      break;
    }
  }
  r.scale = std::move(s);
  return r;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_normal_cdf(double x) {
  if (x > -20.0) return std::log(normal_cdf(x));
  // Asymptotic series of the Mills ratio for the far lower tail.
  double x2 = x * x;
  double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - kLogSqrt2Pi - std::log(-x) + std::log(series);
}

double inverse_mills(double x) {
  if (x > -20.0) {
    double pdf = std::exp(-0.5 * x * x - kLogSqrt2Pi);
    return pdf / normal_cdf(x);
  }
  double x2 = x * x;
  double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -x / series;
}

double thurstone_objective(std::span<const double> scale, std::span<const PairCount> counts,
                           double penalty) {
  double ll = 0.0;
  for (const auto& p : counts)
    if (p.wins > 0) ll += p.wins * log_normal_cdf(scale[p.winner] - scale[p.loser]);
  double sq = 0.0;
  for (double v : scale)
    if (std::isfinite(v)) sq += v * v;
  return ll - 0.5 * penalty * sq;
}

ThurstoneFit fit_thurstone(int n_items, std::span<const PairCount> counts,
                           const ThurstoneOptions& options) {
  if (n_items < 0) throw ValidationError("negative item count");
  if (!(options.penalty > 0.0) || !(options.step > 0.0) || options.step >= 1.0)
    throw ValidationError("thurstone: need penalty > 0 and step in (0,1)");

  // Merge both directions of each unordered pair into one edge.
  std::map<std::pair<int, int>, std::pair<double, double>> merged;
  for (const auto& p : counts) {
    if (p.winner < 0 || p.loser < 0 || p.winner >= n_items || p.loser >= n_items)
      throw ValidationError("thurstone: comparison references unknown item");
    if (p.winner == p.loser || !(p.wins > 0.0)) continue;
    if (p.winner < p.loser)
      merged[{p.winner, p.loser}].first += p.wins;
    else
      merged[{p.loser, p.winner}].second += p.wins;
  }
  if (merged.empty()) throw UndefinedError("thurstone: empty comparison set");

  std::vector<int> parent(static_cast<std::size_t>(n_items));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<bool> touched(static_cast<std::size_t>(n_items), false);
  for (const auto& [key, w] : merged) {
    touched[key.first] = touched[key.second] = true;
    int ra = find_root(parent, key.first), rb = find_root(parent, key.second);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  ThurstoneFit fit;
  fit.scale.assign(static_cast<std::size_t>(n_items), std::nan(""));
  fit.component.assign(static_cast<std::size_t>(n_items), -1);
  std::vector<int> local(static_cast<std::size_t>(n_items), -1);
  std::vector<Component> comps;
  std::map<int, int> root_to_comp;
  for (int i = 0; i < n_items; ++i) {
    if (!touched[i]) continue;
    int root = find_root(parent, i);
    auto [it, inserted] = root_to_comp.emplace(root, static_cast<int>(comps.size()));
    if (inserted) comps.emplace_back();
    fit.component[i] = it->second;
    local[i] = static_cast<int>(comps[it->second].items.size());
    comps[it->second].items.push_back(i);
  }
  for (const auto& [key, w] : merged)
    comps[fit.component[key.first]].edges.push_back({local[key.first], local[key.second], w.first, w.second});
  fit.components = static_cast<int>(comps.size());

  std::vector<SolveResult> results(comps.size());
  parallel_for(static_cast<std::ptrdiff_t>(comps.size()),
               [&](std::ptrdiff_t c) { results[c] = solve_component(comps[c], options); });
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (std::size_t k = 0; k < comps[c].items.size(); ++k) fit.scale[comps[c].items[k]] = results[c].scale[k];
    fit.iterations = std::max(fit.iterations, results[c].iterations);
    fit.converged = fit.converged && results[c].converged;
  }
  return fit;
}

}  // namespace engage
