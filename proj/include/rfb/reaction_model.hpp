#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rfb/graph.hpp"

namespace rfb {

// Backward reaction model: maps a product molecule to an ordered list of
// single-product reactions. Results are cached by molecule string, so
// call_count() is the number of distinct molecules sent to the model.
class BackwardModel {
 public:
  virtual ~BackwardModel() = default;

  const std::vector<Proposal>& propose(std::string_view molecule);
  std::size_t call_count() const noexcept { return calls_; }

 protected:
  virtual std::vector<Proposal> generate(std::string_view molecule) = 0;

 private:
  std::unordered_map<std::string, std::vector<Proposal>> cache_;
  std::size_t calls_ = 0;
};

// Throws rejected_proposal if a proposal is empty, repeats the product, or has
// an empty reactant; throws protocol if scores are outside [0, 1] or increase
// with rank. Zero limits disable the size checks.
void validate_proposals(std::string_view product, const std::vector<Proposal>& proposals,
                        std::size_t max_children = 0, std::size_t max_reactants = 0);

struct WorldParams {
  std::uint64_t seed = 0;
  int max_children = 10;
  int max_reactants = 3;
  int alphabet_size = 6;
  // Molecules up to this length may be purchasable and dead-end often.
  int buyable_length = 2;
  double dead_end_short = 0.3;
  double dead_end_long = 0.05;
  // Chance that a generated proposal is a one-character rewrite, not a split.
  double rewrite_rate = 0.15;
  // Chance that a molecule one symbol longer than buyable_length has a tier.
  double tiered_medium = 0.2;
};

// Seeded synthetic chemistry over strings of the letters 'a', 'b', ....
// Proposals split a molecule into 2..L contiguous pieces or rewrite one
// character. Everything is a pure function of (params, molecule).
class SyntheticWorld final : public BackwardModel {
 public:
  explicit SyntheticWorld(WorldParams params);

  const WorldParams& params() const noexcept { return params_; }
  bool in_alphabet(std::string_view molecule) const noexcept;
  // Inventory tier 0..5, or nullopt when the molecule cannot be bought.
  std::optional<int> tier(std::string_view molecule) const;
  static std::optional<int> tier_of(const WorldParams& params, std::string_view molecule);

  TierLookup tier_lookup() const;

  // Distinct non-purchasable targets with at least one proposal.
  std::vector<std::string> generate_targets(std::size_t count, int min_length, int max_length,
                                            std::uint64_t stream = 0) const;

 protected:
  std::vector<Proposal> generate(std::string_view molecule) override;

 private:
  WorldParams params_;
};

// Toy rewrite rules: a product pattern with at most one '*' wildcard matching
// a nonempty substring, substituted into each reactant pattern.
struct Rule {
  std::string product;
  std::vector<std::string> reactants;
  double score = 0.0;
};

class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<Rule> rules);

  // {"rules": [{"product": "*ab", "reactants": ["*a", "b"], "score": 0.7}, ...]}
  static RuleSet from_json(std::string_view text);
  static RuleSet load(const std::string& path);

  // Matching rules in descending score order (stable for ties); reactions that
  // would contain an empty reactant or the product itself are skipped, and
  // repeated reactant lists keep their first occurrence.
  std::vector<Proposal> apply(std::string_view molecule) const;

  const std::vector<Rule>& rules() const noexcept { return rules_; }

 private:
  std::vector<Rule> rules_;
};

class RuleSetModel final : public BackwardModel {
 public:
  explicit RuleSetModel(RuleSet rules) : rules_(std::move(rules)) {}

 protected:
  std::vector<Proposal> generate(std::string_view molecule) override { return rules_.apply(molecule); }

 private:
  RuleSet rules_;
};

}  // namespace rfb
