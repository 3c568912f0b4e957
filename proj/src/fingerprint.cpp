#include "rfb/fingerprint.hpp"

#include <algorithm>
#include <map>

namespace rfb {

std::uint32_t Fingerprint::count(std::uint32_t feature) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), feature,
                             [](const auto& e, std::uint32_t f) { return e.first < f; });
  return (it != entries.end() && it->first == feature) ? it->second : 0;
}

std::uint64_t Fingerprint::total() const {
  std::uint64_t t = 0;
  for (const auto& e : entries) t += e.second;
  return t;
}

Fingerprint fingerprint(std::string_view molecule) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (std::size_t i = 0; i + 1 < molecule.size(); ++i) ++counts[bigram_feature(molecule[i], molecule[i + 1])];
  Fingerprint fp;
  fp.entries.assign(counts.begin(), counts.end());
  return fp;
}

namespace {

// Merge-walks both sorted vectors, combining counts with `op`.
template <class Op>
Fingerprint merge(const Fingerprint& a, const Fingerprint& b, Op op) {
  Fingerprint out;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() || ib != b.entries.end()) {
    std::uint32_t feature;
    std::uint32_t ca = 0;
    std::uint32_t cb = 0;
    if (ib == b.entries.end() || (ia != a.entries.end() && ia->first < ib->first)) {
      feature = ia->first;
      ca = (ia++)->second;
    } else if (ia == a.entries.end() || ib->first < ia->first) {
      feature = ib->first;
      cb = (ib++)->second;
    } else {
      feature = ia->first;
      ca = (ia++)->second;
      cb = (ib++)->second;
    }
    if (auto v = op(ca, cb); v != 0) out.entries.emplace_back(feature, v);
  }
  return out;
}

}  // namespace

Fingerprint add(const Fingerprint& a, const Fingerprint& b) {
  return merge(a, b, [](std::uint32_t x, std::uint32_t y) { return x + y; });
}

Fingerprint abs_difference(const Fingerprint& a, const Fingerprint& b) {
  return merge(a, b, [](std::uint32_t x, std::uint32_t y) { return x > y ? x - y : y - x; });
}

ReactionFingerprints reaction_fingerprints(std::string_view product, std::span<const std::string> reactants) {
  Fingerprint reactant_sum;
  for (const auto& r : reactants) reactant_sum = add(reactant_sum, fingerprint(r));
  const Fingerprint prod = fingerprint(product);
  return {add(prod, reactant_sum), abs_difference(prod, reactant_sum)};
}

double jaccard(const Fingerprint& x, const Fingerprint& y) {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  auto ix = x.entries.begin();
  auto iy = y.entries.begin();
  while (ix != x.entries.end() || iy != y.entries.end()) {
    if (iy == y.entries.end() || (ix != x.entries.end() && ix->first < iy->first)) {
      hi += (ix++)->second;
    } else if (ix == x.entries.end() || iy->first < ix->first) {
      hi += (iy++)->second;
    } else {
      lo += std::min(ix->second, iy->second);
      hi += std::max(ix->second, iy->second);
      ++ix;
      ++iy;
    }
  }
  if (hi == 0) return 1.0;
  return static_cast<double>(lo) / static_cast<double>(hi);
}

double reaction_kernel(const ReactionFingerprints& a, const ReactionFingerprints& b) {
  return jaccard(a.combined, b.combined) * jaccard(a.delta, b.delta);
}

}  // namespace rfb
