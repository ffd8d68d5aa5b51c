#pragma once

// Classical single-world oracles: parity enumeration, exact optimization over
// pairs of ontic distributions under a total-variation budget, and a
// possibilistic rule checker.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace cflab::ontic {

inline constexpr std::size_t kMaxEnumeratedObservables = 20;
inline constexpr double kSupportThreshold = 1e-10;

// prod_{o in observables} v(o) == sign, with v(o) in {+1, -1}.
struct ParityConstraint {
  std::vector<std::string> observables;
  int sign = 1;
};

struct EnumerationResult {
  std::vector<std::string> observables;
  // Each row is aligned with `observables`; rows appear in counting order with
  // the first observable as the most significant bit (+1 before -1).
  std::vector<std::vector<int>> satisfying;
  std::size_t examined = 0;

  bool contradiction() const noexcept { return satisfying.empty(); }
};

// EnumerationTooLarge beyond 20 observables; InvalidParameter when a
// constraint names an undeclared observable or a sign other than +-1.
EnumerationResult enumerate_assignments(const std::vector<std::string>& observables,
                                        const std::vector<ParityConstraint>& constraints);

struct OnticSpace {
  std::vector<std::string> states;
  // Proposition name -> value per ontic state.
  std::vector<std::pair<std::string, std::vector<int>>> propositions;
  // Each family must have exactly one true proposition in every state.
  std::vector<std::vector<std::string>> exclusive_families;

  void validate() const;  // InvalidParameter
  const std::vector<int>& values(const std::string& proposition) const;
};

// {lambda_A, lambda_B, lambda_C} with exclusive indicators chi_A, chi_B, chi_C.
OnticSpace three_box_space();

// objective = sum_l weight_a[l] mu_A(l) + sum_l weight_b[l] mu_B(l).
struct LinearObjective {
  std::vector<double> weight_a;
  std::vector<double> weight_b;
};

struct OnticOptimum {
  double value = 0.0;
  std::vector<double> mu_a;
  std::vector<double> mu_b;
  std::size_t vertices_examined = 0;
};

// TV(mu_A, mu_B) = 1/2 ||mu_A - mu_B||_1 <= tv_budget. The maximum is taken
// over the vertices of the coupling polytope, which is exact.
OnticOptimum optimize_over_ontic(const OnticSpace& space, const LinearObjective& objective, double tv_budget);

// Objective P_A + P_B with P_x = integral of chi_x against mu(.|x).
LinearObjective three_box_objective(const OnticSpace& space);

// sum coeff * Q(t_i) Q(t_j) over the listed time pairs.
struct CorrelatorTerm {
  int i = 0;
  int j = 1;
  int coefficient = 1;
};

struct MacrorealistBound {
  int deterministic_max = 0;  // over all +-1 trajectories
  double bound = 0.0;         // deterministic_max + c * epsilon
  std::vector<int> argmax;
};

// Standard K3 = C12 + C23 - C13 over three times.
std::vector<CorrelatorTerm> leggett_garg_k3();

MacrorealistBound macrorealist_max(const std::vector<CorrelatorTerm>& terms, int n_times,
                                   double epsilon, double c);

using Literal = std::pair<std::string, int>;  // variable == value

struct PossibilisticTable {
  std::vector<std::string> variables;
  std::vector<std::vector<int>> support;
  double threshold = kSupportThreshold;

  // Keeps the tuples whose probability exceeds `threshold`.
  static PossibilisticTable from_distribution(std::vector<std::string> variables,
                                              const std::vector<std::pair<std::vector<int>, double>>& rows,
                                              double threshold = kSupportThreshold);
};

struct ModalRule {
  std::vector<Literal> premise;
  Literal conclusion;
};

// Rules applied in sequence; the chain concludes the last rule's conclusion
// on the support rows matching the first rule's premise.
struct RuleChain {
  std::string name;
  std::vector<ModalRule> rules;
};

struct RuleVerdict {
  bool verified = false;
  bool vacuous = false;
  std::size_t premise_rows = 0;
  std::size_t counterexamples = 0;
};

struct ChainVerdict {
  std::string name;
  bool verified = false;
  bool vacuous = false;
  Literal conclusion;
  std::vector<RuleVerdict> rules;
  std::vector<std::size_t> premise_support;  // row indices
};

struct ModalVerdict {
  std::vector<ChainVerdict> chains;
  bool contradiction = false;
  std::vector<std::pair<std::string, std::string>> conflicting;  // chain names
};

// EmptySupport on an empty table; InvalidParameter on unknown variables.
ModalVerdict modal_check(const PossibilisticTable& table, const std::vector<RuleChain>& chains);

}  // namespace cflab::ontic
