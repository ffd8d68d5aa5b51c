#include "cflab/ontic.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "cflab/error.hpp"

namespace cflab::ontic {

EnumerationResult enumerate_assignments(const std::vector<std::string>& observables,
                                        const std::vector<ParityConstraint>& constraints) {
  if (observables.size() > kMaxEnumeratedObservables) {
    throw Error(ErrorKind::EnumerationTooLarge,
                std::to_string(observables.size()) + " observables exceed the exhaustive limit of 20");
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < observables.size(); ++i) {
    if (!index.emplace(observables[i], i).second) {
      throw Error(ErrorKind::InvalidParameter, "observable '" + observables[i] + "' declared twice");
    }
  }
  // Each constraint becomes a bit mask; its product is -1 iff an odd number of
  // masked observables take the value -1.
  std::vector<std::pair<std::uint32_t, bool>> masks;
  const std::size_t n = observables.size();
  for (const auto& c : constraints) {
    if (c.sign != 1 && c.sign != -1) throw Error(ErrorKind::InvalidParameter, "parity sign must be +1 or -1");
    std::uint32_t mask = 0;
    for (const auto& o : c.observables) {
      const auto it = index.find(o);
      if (it == index.end()) throw Error(ErrorKind::InvalidParameter, "constraint names unknown observable '" + o + "'");
      mask ^= 1u << (n - 1 - it->second);
    }
    masks.emplace_back(mask, c.sign == -1);
  }

  EnumerationResult result;
  result.observables = observables;
  const std::uint64_t total = 1ull << n;
  for (std::uint64_t m = 0; m < total; ++m) {
    const auto bits = static_cast<std::uint32_t>(m);
    const bool ok = std::all_of(masks.begin(), masks.end(), [&](const auto& mk) {
      return (std::popcount(bits & mk.first) % 2 == 1) == mk.second;
    });
    if (!ok) continue;
    std::vector<int> row(n);
    for (std::size_t i = 0; i < n; ++i) row[i] = (bits >> (n - 1 - i)) & 1u ? -1 : 1;
    result.satisfying.push_back(std::move(row));
  }
  result.examined = total;
  return result;
}

const std::vector<int>& OnticSpace::values(const std::string& proposition) const {
  for (const auto& [name, v] : propositions) {
    if (name == proposition) return v;
  }
  throw Error(ErrorKind::InvalidParameter, "unknown proposition '" + proposition + "'");
}

void OnticSpace::validate() const {
  if (states.empty()) throw Error(ErrorKind::InvalidParameter, "ontic space has no states");
  for (const auto& [name, v] : propositions) {
    if (v.size() != states.size()) {
      throw Error(ErrorKind::InvalidParameter, "proposition '" + name + "' does not cover every ontic state");
    }
  }
  for (const auto& family : exclusive_families) {
    for (std::size_t s = 0; s < states.size(); ++s) {
      int count = 0;
      for (const auto& p : family) count += values(p)[s] != 0;
      if (count != 1) {
        throw Error(ErrorKind::InvalidParameter, "exclusivity fails in ontic state '" + states[s] + "'");
      }
    }
  }
}

OnticSpace three_box_space() {
  OnticSpace space;
  space.states = {"lambda_A", "lambda_B", "lambda_C"};
  space.propositions = {{"chi_A", {1, 0, 0}}, {"chi_B", {0, 1, 0}}, {"chi_C", {0, 0, 1}}};
  space.exclusive_families = {{"chi_A", "chi_B", "chi_C"}};
  return space;
}

LinearObjective three_box_objective(const OnticSpace& space) {
  LinearObjective obj;
  for (int v : space.values("chi_A")) obj.weight_a.push_back(v);
  for (int v : space.values("chi_B")) obj.weight_b.push_back(v);
  return obj;
}

OnticOptimum optimize_over_ontic(const OnticSpace& space, const LinearObjective& objective, double tv_budget) {
  space.validate();
  const std::size_t n = space.states.size();
  if (objective.weight_a.size() != n || objective.weight_b.size() != n) {
    throw Error(ErrorKind::InvalidParameter, "objective weights must cover every ontic state");
  }
  if (!(tv_budget >= 0.0)) throw Error(ErrorKind::InvalidParameter, "TV budget must be nonnegative");

  // Pairs (mu_A, mu_B) with TV <= b are the marginals of couplings W whose
  // off-diagonal mass is <= b. That set is a simplex cut by one half-space;
  // its vertices are e_ii, e_jk when b >= 1, and (1 - b) e_ii + b e_jk.
  const double b = std::min(tv_budget, 1.0);
  OnticOptimum best;
  best.value = -std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t i, std::size_t j, std::size_t k, double w) {
    // Coupling (1 - w) e_ii + w e_jk.
    const double value = (1.0 - w) * (objective.weight_a[i] + objective.weight_b[i]) +
                         w * (objective.weight_a[j] + objective.weight_b[k]);
    ++best.vertices_examined;
    if (value > best.value) {
      best.value = value;
      best.mu_a.assign(n, 0.0);
      best.mu_b.assign(n, 0.0);
      best.mu_a[i] += 1.0 - w;
      best.mu_b[i] += 1.0 - w;
      best.mu_a[j] += w;
      best.mu_b[k] += w;
    }
  };
  for (std::size_t i = 0; i < n; ++i) consider(i, i, i, 0.0);
  if (b > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (j != k) consider(i, j, k, b);
  }
  return best;
}

std::vector<CorrelatorTerm> leggett_garg_k3() { return {{0, 1, 1}, {1, 2, 1}, {0, 2, -1}}; }

MacrorealistBound macrorealist_max(const std::vector<CorrelatorTerm>& terms, int n_times, double epsilon,
                                   double c) {
  if (epsilon < 0.0) throw Error(ErrorKind::InvalidParameter, "epsilon must be nonnegative");
  if (n_times < 1 || n_times > static_cast<int>(kMaxEnumeratedObservables)) {
    throw Error(ErrorKind::EnumerationTooLarge, "trajectory length out of the exhaustive range");
  }
  for (const auto& t : terms) {
    if (t.i < 0 || t.j < 0 || t.i >= n_times || t.j >= n_times) {
      throw Error(ErrorKind::InvalidParameter, "correlator term references a missing time");
    }
  }
  MacrorealistBound out;
  out.deterministic_max = std::numeric_limits<int>::min();
  for (std::uint32_t m = 0; m < (1u << n_times); ++m) {
    std::vector<int> q(n_times);
    for (int t = 0; t < n_times; ++t) q[t] = (m >> (n_times - 1 - t)) & 1u ? -1 : 1;
    int value = 0;
    for (const auto& term : terms) value += term.coefficient * q[term.i] * q[term.j];
    if (value > out.deterministic_max) {
      out.deterministic_max = value;
      out.argmax = q;
    }
  }
  out.bound = out.deterministic_max + c * epsilon;
  return out;
}

PossibilisticTable PossibilisticTable::from_distribution(
    std::vector<std::string> variables, const std::vector<std::pair<std::vector<int>, double>>& rows,
    double threshold) {
  PossibilisticTable t;
  t.variables = std::move(variables);
  t.threshold = threshold;
  for (const auto& [tuple, p] : rows) {
    if (tuple.size() != t.variables.size()) throw Error(ErrorKind::InvalidParameter, "tuple arity mismatch");
    if (p > threshold) t.support.push_back(tuple);
  }
  return t;
}

namespace {

struct BoundLiteral {
  std::size_t column;
  int value;
};

BoundLiteral bind(const PossibilisticTable& table, const Literal& lit) {
  const auto it = std::find(table.variables.begin(), table.variables.end(), lit.first);
  if (it == table.variables.end()) throw Error(ErrorKind::InvalidParameter, "unknown variable '" + lit.first + "'");
  return {static_cast<std::size_t>(it - table.variables.begin()), lit.second};
}

bool matches(const std::vector<int>& row, const std::vector<BoundLiteral>& lits) {
  return std::all_of(lits.begin(), lits.end(), [&](const BoundLiteral& l) { return row[l.column] == l.value; });
}

}  // namespace

ModalVerdict modal_check(const PossibilisticTable& table, const std::vector<RuleChain>& chains) {
  if (table.support.empty()) throw Error(ErrorKind::EmptySupport, "possibilistic table has no support");
  ModalVerdict verdict;
  for (const auto& chain : chains) {
    if (chain.rules.empty()) throw Error(ErrorKind::InvalidParameter, "chain '" + chain.name + "' has no rules");
    ChainVerdict cv;
    cv.name = chain.name;
    cv.verified = true;
    cv.conclusion = chain.rules.back().conclusion;
    for (std::size_t r = 0; r < chain.rules.size(); ++r) {
      const auto& rule = chain.rules[r];
      std::vector<BoundLiteral> premise;
      for (const auto& l : rule.premise) premise.push_back(bind(table, l));
      const auto concl = bind(table, rule.conclusion);
      RuleVerdict rv;
      for (std::size_t row = 0; row < table.support.size(); ++row) {
        if (!matches(table.support[row], premise)) continue;
        ++rv.premise_rows;
        if (r == 0) cv.premise_support.push_back(row);
        if (table.support[row][concl.column] != concl.value) ++rv.counterexamples;
      }
      rv.vacuous = rv.premise_rows == 0;
      rv.verified = rv.counterexamples == 0;
      cv.verified = cv.verified && rv.verified;
      cv.rules.push_back(rv);
    }
    cv.vacuous = cv.premise_support.empty();
    verdict.chains.push_back(std::move(cv));
  }
  for (std::size_t a = 0; a < verdict.chains.size(); ++a) {
    for (std::size_t b = a + 1; b < verdict.chains.size(); ++b) {
      const auto& x = verdict.chains[a];
      const auto& y = verdict.chains[b];
      if (!x.verified || !y.verified || x.vacuous || y.vacuous) continue;
      if (x.conclusion.first != y.conclusion.first || x.conclusion.second == y.conclusion.second) continue;
      std::vector<std::size_t> common;
      std::set_intersection(x.premise_support.begin(), x.premise_support.end(), y.premise_support.begin(),
                            y.premise_support.end(), std::back_inserter(common));
      if (!common.empty()) {
        verdict.contradiction = true;
        verdict.conflicting.emplace_back(x.name, y.name);
      }
    }
  }
  return verdict;
}

}  // namespace cflab::ontic
