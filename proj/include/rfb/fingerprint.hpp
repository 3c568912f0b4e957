#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rfb {

// Sparse count vector: (feature, count) pairs sorted by feature, no zero counts.
struct Fingerprint {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;

  std::uint32_t count(std::uint32_t feature) const;
  std::uint64_t total() const;
  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

// Feature id of a character bigram.
constexpr std::uint32_t bigram_feature(char a, char b) noexcept {
  return (static_cast<std::uint32_t>(static_cast<unsigned char>(a)) << 8) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b));
}

// Character-bigram counts of a synthetic molecule string.
Fingerprint fingerprint(std::string_view molecule);

Fingerprint add(const Fingerprint& a, const Fingerprint& b);
// Elementwise |a - b|.
Fingerprint abs_difference(const Fingerprint& a, const Fingerprint& b);

struct ReactionFingerprints {
  Fingerprint combined;  // product + all reactants
  Fingerprint delta;     // |product - sum(reactants)|
};

ReactionFingerprints reaction_fingerprints(std::string_view product, std::span<const std::string> reactants);

// Jaccard (min/max) similarity of count vectors; two empty vectors score 1.
double jaccard(const Fingerprint& x, const Fingerprint& y);

// Product of the molecule-set and mechanism Jaccard kernels.
double reaction_kernel(const ReactionFingerprints& a, const ReactionFingerprints& b);

}  // namespace rfb
