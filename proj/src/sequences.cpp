#include "interfere/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include "interfere/errors.hpp"

namespace interfere {

Sequence::Sequence(std::vector<int> labels, int t) : labels_(std::move(labels)), t_(t) {
  if (t_ < 1) throw InvalidInput("Sequence: t must be >= 1");
  if (labels_.empty()) throw InvalidInput("Sequence: empty label list");
  for (int v : labels_) {
    if (v < 1 || v > t_) {
      throw InvalidInput("Sequence: label " + std::to_string(v) + " outside 1.." + std::to_string(t_));
    }
  }
}

std::string Sequence::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < labels_.size(); ++i) os << (i ? " " : "") << labels_[i];
  os << ')';
  return os.str();
}

std::int64_t falling_factorial(int t, int h) {
  std::int64_t out = 1;
  for (int i = 0; i < h; ++i) out *= (t - i);
  return out;
}

SymmetricBlock canonicalize(const Sequence& s) {
  std::vector<int> relabel(static_cast<std::size_t>(s.t()) + 1, 0);
  std::vector<int> rep;
  rep.reserve(s.labels().size());
  int next = 0;
  for (int v : s.labels()) {
    auto& slot = relabel[static_cast<std::size_t>(v)];
    if (slot == 0) slot = ++next;
    rep.push_back(slot);
  }
  return {Sequence(std::move(rep), s.t()), falling_factorial(s.t(), next), next};
}

std::vector<SymmetricBlock> enumerate_blocks(int k, int t) {
  if (k < 3) throw InvalidInput("enumerate_blocks: k must be >= 3");
  if (t < 2) throw InvalidInput("enumerate_blocks: t must be >= 2");
  if (static_cast<double>(k) * std::log10(static_cast<double>(t)) > 7.0) {
    throw CapacityError("enumerate_blocks: t^k exceeds 1e7 sequences");
  }
  // Restricted growth strings in lexicographic order, at most t distinct labels.
  std::vector<SymmetricBlock> out;
  std::vector<int> rgs(static_cast<std::size_t>(k), 1);
  std::function<void(int, int)> grow = [&](int pos, int used) {
    if (pos == k) {
      out.push_back({Sequence(rgs, t), falling_factorial(t, used), used});
      return;
    }
    const int limit = std::min(used + 1, t);
    for (int v = 1; v <= limit; ++v) {
      rgs[static_cast<std::size_t>(pos)] = v;
      grow(pos + 1, std::max(used, v));
    }
  };
  grow(1, 1);
  return out;
}

Sequence dual(const Sequence& s) {
  std::vector<int> rev(s.labels().rbegin(), s.labels().rend());
  return Sequence(std::move(rev), s.t());
}

SequenceStats stats(const Sequence& s) {
  SequenceStats st;
  const auto& l = s.labels();
  const std::size_t k = l.size();
  st.freq.assign(static_cast<std::size_t>(s.t()), 0);
  for (int v : l) ++st.freq[static_cast<std::size_t>(v - 1)];
  for (std::size_t i = 0; i + 1 < k; ++i) st.phi += (l[i] == l[i + 1]);
  for (std::size_t i = 1; i + 1 < k; ++i) st.varphi += (l[i - 1] == l[i + 1]);
  for (int f : st.freq) st.chi += f * f;
  st.first_label = l.front();
  st.last_label = l.back();
  return st;
}

Sequence relabel(const Sequence& s, const std::vector<int>& map) {
  std::vector<int> out;
  out.reserve(s.labels().size());
  for (int v : s.labels()) {
    if (v < 1 || static_cast<std::size_t>(v) > map.size()) {
      throw InvalidInput("relabel: map does not cover label " + std::to_string(v));
    }
    out.push_back(map[static_cast<std::size_t>(v - 1)]);
  }
  return Sequence(std::move(out), s.t());
}

namespace {

// Finite field GF(p^m) with elements encoded as base-p digit vectors.
struct FiniteField {
  int p = 0;
  int m = 0;
  int q = 0;
  std::vector<int> add_table;
  std::vector<int> mul_table;

  int add(int a, int b) const { return add_table[static_cast<std::size_t>(a * q + b)]; }
  int mul(int a, int b) const { return mul_table[static_cast<std::size_t>(a * q + b)]; }
};

std::optional<std::pair<int, int>> prime_power(int t) {
  for (int p = 2; p <= t; ++p) {
    if (t % p != 0) continue;
    int m = 0;
    int r = t;
    while (r % p == 0) {
      r /= p;
      ++m;
    }
    if (r == 1) return std::make_pair(p, m);
    return std::nullopt;
  }
  return std::nullopt;
}

std::vector<int> digits(int a, int p, int m) {
  std::vector<int> d(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    d[static_cast<std::size_t>(i)] = a % p;
    a /= p;
  }
  return d;
}

int undigits(const std::vector<int>& d, int p) {
  int a = 0;
  for (std::size_t i = d.size(); i-- > 0;) a = a * p + d[i];
  return a;
}

std::optional<FiniteField> make_field(int t) {
  const auto pm = prime_power(t);
  if (!pm) return std::nullopt;
  const auto [p, m] = *pm;
  FiniteField f{p, m, t, std::vector<int>(static_cast<std::size_t>(t * t)),
                std::vector<int>(static_cast<std::size_t>(t * t))};
  for (int a = 0; a < t; ++a) {
    for (int b = 0; b < t; ++b) {
      auto da = digits(a, p, m);
      const auto db = digits(b, p, m);
      for (int i = 0; i < m; ++i) da[static_cast<std::size_t>(i)] = (da[static_cast<std::size_t>(i)] + db[static_cast<std::size_t>(i)]) % p;
      f.add_table[static_cast<std::size_t>(a * t + b)] = undigits(da, p);
    }
  }
  // Try monic modulus polynomials x^m + c(x) until the product has no zero divisors.
  for (int c = 0; c < t; ++c) {
    const auto low = digits(c, p, m);
    auto mulmod = [&](int a, int b) {
      const auto da = digits(a, p, m);
      const auto db = digits(b, p, m);
      std::vector<int> prod(static_cast<std::size_t>(2 * m), 0);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          prod[static_cast<std::size_t>(i + j)] =
              (prod[static_cast<std::size_t>(i + j)] + da[static_cast<std::size_t>(i)] * db[static_cast<std::size_t>(j)]) % p;
      // x^m == -c(x)
      for (int deg = 2 * m - 1; deg >= m; --deg) {
        const int coef = prod[static_cast<std::size_t>(deg)];
        if (coef == 0) continue;
        prod[static_cast<std::size_t>(deg)] = 0;
        for (int i = 0; i < m; ++i) {
          auto& slot = prod[static_cast<std::size_t>(deg - m + i)];
          slot = ((slot - coef * low[static_cast<std::size_t>(i)]) % p + p) % p;
        }
      }
      prod.resize(static_cast<std::size_t>(m));
      return undigits(prod, p);
    };
    bool field = true;
    for (int a = 1; a < t && field; ++a)
      for (int b = 1; b < t && field; ++b)
        if (mulmod(a, b) == 0) field = false;
    if (!field) continue;
    for (int a = 0; a < t; ++a)
      for (int b = 0; b < t; ++b) f.mul_table[static_cast<std::size_t>(a * t + b)] = mulmod(a, b);
    return f;
  }
  return std::nullopt;
}

void append_lexicographic(int h, int t, std::set<std::vector<int>>& seen,
                          std::vector<std::vector<int>>& out) {
  std::vector<int> cur;
  std::vector<bool> used(static_cast<std::size_t>(t) + 1, false);
  std::function<void()> rec = [&]() {
    if (static_cast<int>(cur.size()) == h) {
      if (seen.insert(cur).second) out.push_back(cur);
      return;
    }
    for (int v = 1; v <= t; ++v) {
      if (used[static_cast<std::size_t>(v)]) continue;
      used[static_cast<std::size_t>(v)] = true;
      cur.push_back(v);
      rec();
      cur.pop_back();
      used[static_cast<std::size_t>(v)] = false;
    }
  };
  rec();
}

}  // namespace

std::vector<std::vector<int>> balanced_relabelings(int h, int t) {
  if (h < 1 || h > t) throw InvalidInput("balanced_relabelings: need 1 <= h <= t");
  std::vector<std::vector<int>> out;
  std::set<std::vector<int>> seen;
  if (t <= 64) {
    if (const auto field = make_field(t)) {
      for (int a = 1; a < t; ++a) {
        for (int b = 0; b < t; ++b) {
          std::vector<int> map(static_cast<std::size_t>(h));
          for (int i = 0; i < h; ++i) map[static_cast<std::size_t>(i)] = field->add(field->mul(a, i), b) + 1;
          if (seen.insert(map).second) out.push_back(std::move(map));
        }
      }
    }
  }
  if (out.empty()) {
    // No field of order t: cyclic shifts give at least one-way label balance.
    for (int b = 0; b < t; ++b) {
      std::vector<int> map(static_cast<std::size_t>(h));
      for (int i = 0; i < h; ++i) map[static_cast<std::size_t>(i)] = (i + b) % t + 1;
      if (seen.insert(map).second) out.push_back(std::move(map));
    }
  }
  if (static_cast<std::int64_t>(out.size()) < falling_factorial(t, h)) {
    append_lexicographic(h, t, seen, out);
  }
  return out;
}

std::vector<Sequence> orbit_sequences(const SymmetricBlock& block) {
  const int t = block.representative.t();
  std::vector<Sequence> out;
  for (const auto& map : balanced_relabelings(block.distinct_count, t)) out.push_back(relabel(block.representative, map));
  return out;
}

}  // namespace interfere
