#pragma once

// Treatment sequences, their orbits under relabeling of treatments
// ("symmetric blocks"), reversal duals and the counting statistics used by
// the type-H closed forms.

#include <cstdint>
#include <string>
#include <vector>

namespace interfere {

/// A block of k plots, labels 1..t read left to right.
class Sequence {
 public:
  Sequence() = default;
  /// Throws InvalidInput if a label falls outside 1..t or t < 1.
  Sequence(std::vector<int> labels, int t);

  int k() const { return static_cast<int>(labels_.size()); }
  int t() const { return t_; }
  const std::vector<int>& labels() const { return labels_; }
  int operator[](std::size_t i) const { return labels_[i]; }

  std::string str() const;

  friend bool operator==(const Sequence&, const Sequence&) = default;
  friend auto operator<=>(const Sequence& a, const Sequence& b) {
    return a.labels_ <=> b.labels_;
  }

 private:
  std::vector<int> labels_;
  int t_ = 0;
};

/// Orbit <s> of a sequence under all t! relabelings.
struct SymmetricBlock {
  Sequence representative;  // restricted-growth form: new labels appear as 1,2,3,...
  std::int64_t orbit_size = 0;
  int distinct_count = 0;

  friend bool operator==(const SymmetricBlock& a, const SymmetricBlock& b) {
    return a.representative == b.representative;
  }
};

struct SequenceStats {
  int phi = 0;             // adjacent equal pairs
  int varphi = 0;          // positions i with labels at i-1 and i+1 equal
  std::vector<int> freq;   // freq[m-1] = occurrences of label m
  int chi = 0;             // sum of squared frequencies
  int first_label = 0;
  int last_label = 0;
};

SymmetricBlock canonicalize(const Sequence& s);

/// All symmetric blocks for (k, t), representatives in lexicographic order.
/// Throws InvalidInput for k < 3 or t < 2, CapacityError when t^k > 1e7.
std::vector<SymmetricBlock> enumerate_blocks(int k, int t);

Sequence dual(const Sequence& s);

SequenceStats stats(const Sequence& s);

/// t! / (t - h)!
std::int64_t falling_factorial(int t, int h);

/// Injective relabelings of the labels 1..h onto 1..t, ordered so that
/// successive chunks are as balanced across labels as possible.
///
/// When t is a prime power the first t(t-1) maps form the affine group
/// x -> a*x + b over GF(t) (a-major, b-minor), which is sharply
/// 2-transitive: averaging any t x t matrix over a full cycle yields a
/// completely symmetric matrix. Remaining injective maps follow in
/// lexicographic order. Each map is a vector m with m[i-1] = image of i.
std::vector<std::vector<int>> balanced_relabelings(int h, int t);

Sequence relabel(const Sequence& s, const std::vector<int>& map);

/// Every member of the orbit of `block`, in balanced_relabelings order.
std::vector<Sequence> orbit_sequences(const SymmetricBlock& block);

}  // namespace interfere
