#include "rfb/reaction_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rfb/error.hpp"
#include "rfb/random.hpp"

namespace rfb {

const std::vector<Proposal>& BackwardModel::propose(std::string_view molecule) {
  std::string key(molecule);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  auto proposals = generate(molecule);
  ++calls_;
  return cache_.emplace(std::move(key), std::move(proposals)).first->second;
}

void validate_proposals(std::string_view product, const std::vector<Proposal>& proposals,
                        std::size_t max_children, std::size_t max_reactants) {
  const std::string p(product);
  if (max_children && proposals.size() > max_children) {
    throw Error(ErrorKind::rejected_proposal, std::to_string(proposals.size()) + " proposals for '" + p +
                                                  "' exceed the limit of " + std::to_string(max_children));
  }
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto& prop = proposals[i];
    if (prop.reactants.empty()) throw Error(ErrorKind::rejected_proposal, "empty reactant list for '" + p + "'");
    if (max_reactants && prop.reactants.size() > max_reactants) {
      throw Error(ErrorKind::rejected_proposal, "too many reactants in a proposal for '" + p + "'");
    }
    for (const auto& r : prop.reactants) {
      if (r.empty()) throw Error(ErrorKind::rejected_proposal, "empty reactant for '" + p + "'");
      if (r == product) throw Error(ErrorKind::rejected_proposal, "product '" + p + "' listed among its reactants");
    }
    if (!(prop.score >= 0.0 && prop.score <= 1.0)) {
      throw Error(ErrorKind::protocol, "score outside [0, 1] for '" + p + "'");
    }
    if (i > 0 && prop.score > proposals[i - 1].score) {
      throw Error(ErrorKind::protocol, "scores for '" + p + "' are not in descending order");
    }
  }
}

// ---------------------------------------------------------------- world

namespace {

constexpr std::uint64_t kProposeSalt = 0x70726f706f7365ULL;
constexpr std::uint64_t kTierSalt = 0x74696572ULL;
constexpr std::uint64_t kTargetSalt = 0x746172676574ULL;

}  // namespace

SyntheticWorld::SyntheticWorld(WorldParams params) : params_(params) {
  if (params_.max_children < 1 || params_.max_reactants < 2) {
    throw Error(ErrorKind::invalid_config, "world needs max_children >= 1 and max_reactants >= 2");
  }
  if (params_.alphabet_size < 2 || params_.alphabet_size > 26) {
    throw Error(ErrorKind::invalid_config, "alphabet_size must be in [2, 26]");
  }
  if (params_.buyable_length < 1) throw Error(ErrorKind::invalid_config, "buyable_length must be >= 1");
  for (double p : {params_.dead_end_short, params_.dead_end_long, params_.rewrite_rate, params_.tiered_medium}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_config, "world probabilities must be in [0, 1]");
  }
}

bool SyntheticWorld::in_alphabet(std::string_view molecule) const noexcept {
  if (molecule.empty()) return false;
  return std::all_of(molecule.begin(), molecule.end(),
                     [&](char c) { return c >= 'a' && c < 'a' + params_.alphabet_size; });
}

std::optional<int> SyntheticWorld::tier(std::string_view molecule) const { return tier_of(params_, molecule); }

std::optional<int> SyntheticWorld::tier_of(const WorldParams& params, std::string_view molecule) {
  const auto len = static_cast<int>(molecule.size());
  rng::Stream rs(rng::combine(rng::combine(params.seed, kTierSalt), rng::hash_string(molecule)));
  if (len == 1) return static_cast<int>(rs.below(3));
  if (len > params.buyable_length + 1) return std::nullopt;
  if (len == params.buyable_length + 1 && rs.uniform() >= params.tiered_medium) return std::nullopt;
  // Short molecules: mostly fast-shipping tiers, some slower ones.
  const double u = rs.uniform();
  if (u < 0.55) return static_cast<int>(rs.below(3));
  if (u < 0.70) return 3;
  if (u < 0.85) return 4;
  return 5;
}

TierLookup SyntheticWorld::tier_lookup() const {
  return [params = params_](std::string_view m) { return tier_of(params, m); };
}

std::vector<Proposal> SyntheticWorld::generate(std::string_view molecule) {
  if (!in_alphabet(molecule)) {
    throw Error(ErrorKind::invalid_input, "molecule '" + std::string(molecule) + "' is outside the world alphabet");
  }
  const auto len = molecule.size();
  if (len == 1) return {};
  rng::Stream rs(rng::combine(rng::combine(params_.seed, kProposeSalt), rng::hash_string(molecule)));
  const double dead = static_cast<int>(len) <= params_.buyable_length ? params_.dead_end_short : params_.dead_end_long;
  if (rs.uniform() < dead) return {};

  const std::size_t wanted = 1 + rs.below(static_cast<std::uint64_t>(params_.max_children));
  std::vector<Proposal> out;
  std::set<std::vector<std::string>> seen;
  for (std::size_t attempt = 0; attempt < 4 * wanted && out.size() < wanted; ++attempt) {
    Proposal p;
    if (rs.uniform() < params_.rewrite_rate) {
      std::string changed(molecule);
      const auto pos = rs.below(len);
      const auto shift = 1 + rs.below(static_cast<std::uint64_t>(params_.alphabet_size - 1));
      changed[pos] = static_cast<char>('a' + (changed[pos] - 'a' + shift) % params_.alphabet_size);
      p.reactants.push_back(std::move(changed));
    } else {
      const auto max_pieces = std::min<std::size_t>(static_cast<std::size_t>(params_.max_reactants), len);
      const auto pieces = 2 + rs.below(max_pieces - 1);
      // Choose pieces-1 distinct cut points in 1..len-1.
      std::vector<std::size_t> cuts;
      while (cuts.size() < pieces - 1) {
        const auto c = 1 + rs.below(len - 1);
        if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
      }
      std::sort(cuts.begin(), cuts.end());
      std::size_t start = 0;
      for (std::size_t c : cuts) {
        p.reactants.emplace_back(molecule.substr(start, c - start));
        start = c;
      }
      p.reactants.emplace_back(molecule.substr(start));
    }
    auto key = p.reactants;
    std::sort(key.begin(), key.end());
    if (seen.insert(std::move(key)).second) out.push_back(std::move(p));
  }

  std::vector<double> scores;
  for (std::size_t i = 0; i < out.size(); ++i) scores.push_back(rs.uniform());
  std::sort(scores.rbegin(), scores.rend());
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Disjoint intervals per rank keep scores strictly decreasing in (0, 1).
    out[i].score = (scores[i] + static_cast<double>(out.size() - i)) / static_cast<double>(out.size() + 1);
  }
  return out;
}

std::vector<std::string> SyntheticWorld::generate_targets(std::size_t count, int min_length, int max_length,
                                                          std::uint64_t stream) const {
  if (min_length < 2 || max_length < min_length) throw Error(ErrorKind::invalid_config, "bad target length range");
  rng::Stream rs(rng::combine(rng::combine(params_.seed, kTargetSalt), stream));
  SyntheticWorld probe(params_);
  std::vector<std::string> targets;
  std::set<std::string> seen;
  for (std::size_t attempt = 0; targets.size() < count; ++attempt) {
    if (attempt > 1000 * (count + 1)) throw Error(ErrorKind::capacity, "could not generate enough targets");
    const auto len = min_length + static_cast<int>(rs.below(static_cast<std::uint64_t>(max_length - min_length + 1)));
    std::string m;
    for (int i = 0; i < len; ++i) m += static_cast<char>('a' + rs.below(static_cast<std::uint64_t>(params_.alphabet_size)));
    if (tier(m) || seen.count(m)) continue;
    if (probe.generate(m).empty()) continue;
    seen.insert(m);
    targets.push_back(std::move(m));
  }
  return targets;
}

// ---------------------------------------------------------------- rules

RuleSet::RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
  for (const auto& r : rules_) {
    if (r.product.empty() || r.reactants.empty()) throw Error(ErrorKind::invalid_config, "rule needs a product and reactants");
    if (std::count(r.product.begin(), r.product.end(), '*') > 1) {
      throw Error(ErrorKind::invalid_config, "rule product '" + r.product + "' has more than one wildcard");
    }
    if (!(r.score >= 0.0 && r.score <= 1.0)) throw Error(ErrorKind::invalid_config, "rule score outside [0, 1]");
  }
}

RuleSet RuleSet::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_config, std::string("rule file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
    throw Error(ErrorKind::invalid_config, "rule file must be an object with a 'rules' array");
  }
  std::vector<Rule> rules;
  try {
    for (const auto& r : doc["rules"]) {
      rules.push_back({r.at("product").get<std::string>(), r.at("reactants").get<std::vector<std::string>>(),
                       r.at("score").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_config, std::string("rule file: ") + e.what());
  }
  return RuleSet(std::move(rules));
}

RuleSet RuleSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read rule file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

namespace {

std::optional<std::string> match(const std::string& pattern, std::string_view molecule) {
  const auto star = pattern.find('*');
  if (star == std::string::npos) {
    if (pattern == molecule) return std::string();
    return std::nullopt;
  }
  const std::string_view prefix(pattern.data(), star);
  const std::string_view suffix(pattern.data() + star + 1, pattern.size() - star - 1);
  if (molecule.size() <= prefix.size() + suffix.size()) return std::nullopt;
  if (molecule.substr(0, prefix.size()) != prefix) return std::nullopt;
  if (molecule.substr(molecule.size() - suffix.size()) != suffix) return std::nullopt;
  return std::string(molecule.substr(prefix.size(), molecule.size() - prefix.size() - suffix.size()));
}

}  // namespace

std::vector<Proposal> RuleSet::apply(std::string_view molecule) const {
  std::vector<const Rule*> order;
  for (const auto& r : rules_) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const Rule* a, const Rule* b) { return a->score > b->score; });

  std::vector<Proposal> out;
  std::set<std::vector<std::string>> seen;
  for (const Rule* rule : order) {
    auto capture = match(rule->product, molecule);
    if (!capture) continue;
    Proposal p;
    p.score = rule->score;
    bool ok = true;
    for (const auto& pattern : rule->reactants) {
      std::string reactant;
      for (char c : pattern) {
        if (c == '*') {
          reactant += *capture;
        } else {
          reactant += c;
        }
      }
      if (reactant.empty() || reactant == molecule) ok = false;
      p.reactants.push_back(std::move(reactant));
    }
    if (ok && seen.insert(p.reactants).second) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace rfb
