#pragma once

// The genus-2 surface group with standard generators a1, b1, a2, b2 and
// relator [a1,b1][a2,b2], realised as the Fuchsian group of the regular
// octagon with opposite sides identified. Words, their Mobius images, and
// permutation representations used to build finite covers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "toda/errors.hpp"
#include "toda/hyperbolic.hpp"

namespace toda {

/// Letters 1..4 stand for a1, b1, a2, b2; negative letters are inverses.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<std::int8_t> letters) : letters_(std::move(letters)) {
    reduce();
  }

  static Word letter(int l) { return Word({static_cast<std::int8_t>(l)}); }

  /// Parses the compact form produced by `str()`, e.g. "A2b1a1" or "e".
  static Word parse(std::string_view s) {
    std::vector<std::int8_t> out;
    if (s == "e" || s.empty()) return Word{};
    if (s.size() % 2 != 0) throw FormatError("malformed word: " + std::string(s));
    for (std::size_t i = 0; i < s.size(); i += 2) {
      const char c = s[i];
      const char d = s[i + 1];
      if (d != '1' && d != '2') throw FormatError("malformed word: " + std::string(s));
      int base = 0;
      switch (c) {
        case 'a': case 'A': base = (d == '1') ? 1 : 3; break;
        case 'b': case 'B': base = (d == '1') ? 2 : 4; break;
        default: throw FormatError("malformed word: " + std::string(s));
      }
      const bool inv = (c == 'A' || c == 'B');
      out.push_back(static_cast<std::int8_t>(inv ? -base : base));
    }
    return Word(std::move(out));
  }

  std::string str() const {
    if (letters_.empty()) return "e";
    static constexpr std::array<const char*, 4> lower{"a1", "b1", "a2", "b2"};
    static constexpr std::array<const char*, 4> upper{"A1", "B1", "A2", "B2"};
    std::string s;
    for (auto l : letters_) s += (l > 0) ? lower[l - 1] : upper[-l - 1];
    return s;
  }

  const std::vector<std::int8_t>& letters() const { return letters_; }
  bool empty() const { return letters_.empty(); }

  Word inverse() const {
    std::vector<std::int8_t> out(letters_.rbegin(), letters_.rend());
    for (auto& l : out) l = static_cast<std::int8_t>(-l);
    return Word(std::move(out));
  }

  friend Word operator*(const Word& x, const Word& y) {
    std::vector<std::int8_t> out = x.letters_;
    out.insert(out.end(), y.letters_.begin(), y.letters_.end());
    return Word(std::move(out));
  }

  friend bool operator==(const Word&, const Word&) = default;

 private:
  void reduce() {
    std::vector<std::int8_t> out;
    out.reserve(letters_.size());
    for (auto l : letters_) {
      if (!out.empty() && out.back() == -l)
        out.pop_back();
      else
        out.push_back(l);
    }
    letters_ = std::move(out);
  }

  std::vector<std::int8_t> letters_;
};

/// The regular octagon with interior angles pi/4, centred at the origin.
namespace octagon {

/// cosh of the inradius is cot(pi/8) = 1 + sqrt(2).
inline double inradius() { return std::acosh(1.0 + std::numbers::sqrt2); }

/// cosh of the circumradius is cot^2(pi/8) = 3 + 2 sqrt(2).
inline double circumradius() { return std::acosh(3.0 + 2.0 * std::numbers::sqrt2); }

/// Corner P_k sits at angle (2k-1) pi/8, so side k = [P_k, P_{k+1}] is
/// centred on the ray at angle k pi/4.
inline Complex corner(int k) {
  const double r = std::tanh(0.5 * circumradius());
  return std::polar(r, (2.0 * k - 1.0) * std::numbers::pi / 8.0);
}

/// Side pairing g_k, k = 0..7, the hyperbolic translation along the ray at
/// angle k pi/4 carrying side k+4 onto side k (P_{k+4} -> P_{k+1},
/// P_{k+5} -> P_k). g_{k+4} = g_k^{-1}.
inline Mobius side_pairing(int k) {
  const double a = 1.0 + std::numbers::sqrt2;
  const double b = std::sqrt(2.0 + 2.0 * std::numbers::sqrt2);
  return {Complex{a, 0.0}, std::polar(b, k * std::numbers::pi / 4.0)};
}

/// The side pairings in standard generators:
///   g0 = a1, g1 = A2 b1 a1, g2 = B2 A2 b1 a1, g3 = b1,
/// equivalently a1 = g0, b1 = g3, a2 = g3 g0 g1^-1, b2 = g1 g2^-1.
inline Word side_pairing_word(int k) {
  static const std::array<Word, 4> w{Word::parse("a1"), Word::parse("A2b1a1"),
                                     Word::parse("B2A2b1a1"), Word::parse("b1")};
  const int m = ((k % 8) + 8) % 8;
  return m < 4 ? w[m] : w[m - 4].inverse();
}

}  // namespace octagon

/// Mobius images of a1, b1, a2, b2.
inline const std::array<Mobius, 4>& standard_generators() {
  static const std::array<Mobius, 4> gens = [] {
    using octagon::side_pairing;
    const Mobius g0 = side_pairing(0), g1 = side_pairing(1), g2 = side_pairing(2),
                 g3 = side_pairing(3);
    return std::array<Mobius, 4>{g0, g3, g3 * g0 * g1.inverse(), g1 * g2.inverse()};
  }();
  return gens;
}

inline Mobius evaluate(const Word& w) {
  Mobius m = Mobius::identity();
  const auto& gens = standard_generators();
  for (auto l : w.letters()) m = m * (l > 0 ? gens[l - 1] : gens[-l - 1].inverse());
  return m;
}

/// Nontrivial elements of a cocompact torsion-free Fuchsian group are
/// hyperbolic, with |trace| >= 2 cosh(systole/2) ~ 4.83 for this group.
inline bool is_identity_element(const Mobius& m) {
  return std::abs(m.trace()) < 2.0 + 1e-6;
}

inline Word surface_relator() { return Word::parse("a1b1A1B1a2b2A2B2"); }

/// Permutation of {0..n-1}; p[i] is the image of i.
using Permutation = std::vector<int>;

inline Permutation identity_permutation(int n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

/// (p * q)(i) = p(q(i)).
inline Permutation compose(const Permutation& p, const Permutation& q) {
  Permutation r(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) r[i] = p[q[i]];
  return r;
}

inline Permutation invert(const Permutation& p) {
  Permutation r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<int>(i);
  return r;
}

inline bool is_permutation(const Permutation& p, int n) {
  if (static_cast<int>(p.size()) != n) return false;
  std::vector<char> seen(n, 0);
  for (int x : p) {
    if (x < 0 || x >= n || seen[x]) return false;
    seen[x] = 1;
  }
  return true;
}

/// Homomorphism from the surface group to S_n given by the images of the
/// four standard generators.
struct CoverSpec {
  int degree = 1;
  std::array<Permutation, 4> generator_images;

  /// a1 -> i+1 mod n, other generators trivial.
  static CoverSpec cyclic(int n) {
    if (n < 1) throw DomainError("cover degree must be >= 1");
    CoverSpec s;
    s.degree = n;
    for (auto& g : s.generator_images) g = identity_permutation(n);
    for (int i = 0; i < n; ++i) s.generator_images[0][i] = (i + 1) % n;
    return s;
  }

  Permutation image(const Word& w) const {
    Permutation p = identity_permutation(degree);
    for (auto l : w.letters()) {
      const Permutation& g = generator_images[std::abs(l) - 1];
      p = compose(p, l > 0 ? g : invert(g));
    }
    return p;
  }

  bool relator_holds() const { return image(surface_relator()) == identity_permutation(degree); }

  bool transitive() const {
    std::vector<char> seen(degree, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (const auto& g : generator_images) {
        for (int y : {g[x], invert(g)[x]}) {
          if (!seen[y]) {
            seen[y] = 1;
            stack.push_back(y);
          }
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  }

  void validate() const {
    if (degree < 1) throw DomainError("cover degree must be >= 1");
    for (const auto& g : generator_images)
      if (!is_permutation(g, degree)) throw DomainError("generator image is not a permutation");
    if (!relator_holds())
      throw RelatorError("generator images violate the surface relator [a1,b1][a2,b2] = 1");
    if (!transitive()) throw DisconnectedCover("permutation action is not transitive");
  }
};

}  // namespace toda
