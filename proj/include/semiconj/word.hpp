#pragma once

#include <string>
#include <vector>

#include "semiconj/errors.hpp"
#include "semiconj/int_matrix.hpp"

namespace semiconj {

/// One letter of a word in the generators: generator index plus inversion flag.
struct Sym {
  int gen = 0;
  bool inv = false;

  bool operator==(const Sym& o) const { return gen == o.gen && inv == o.inv; }
  bool operator!=(const Sym& o) const { return !(*this == o); }
};

/// A word in the free group on the generators, stored left-to-right:
/// w = w[0] w[1] ... w[k-1] acts by w[0] applied last (usual composition order).
using Word = std::vector<Sym>;

inline Sym sym_inverse(Sym s) { return Sym{s.gen, !s.inv}; }

/// Freely reduces a word by cancelling adjacent s s^-1 pairs.
inline Word reduce_word(const Word& w) {
  Word out;
  for (const Sym& s : w) {
    if (!out.empty() && out.back().gen == s.gen && out.back().inv != s.inv)
      out.pop_back();
    else
      out.push_back(s);
  }
  return out;
}

inline Word word_inverse(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(sym_inverse(*it));
  return out;
}

inline Word word_concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return reduce_word(out);
}

/// Renders e.g. "a b^-1 a" with generator names; empty word renders as "e".
inline std::string word_to_string(const Word& w, const std::vector<std::string>& names) {
  if (w.empty()) return "e";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    const Sym& s = w[i];
    if (s.gen < 0 || s.gen >= static_cast<int>(names.size()))
      fail(errc::bad_argument, "generator index out of range in word");
    out += names[s.gen];
    if (s.inv) out += "^-1";
  }
  return out;
}

/// Parses a whitespace-separated word ("a b^-1 a"); "e" or "" is the identity.
inline Word parse_word(const std::string& text, const std::vector<std::string>& names) {
  Word w;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string tok = text.substr(i, j - i);
    i = j;
    if (tok == "e") continue;
    bool inv = false;
    if (tok.size() > 3 && tok.substr(tok.size() - 3) == "^-1") {
      inv = true;
      tok = tok.substr(0, tok.size() - 3);
    }
    int gen = -1;
    for (std::size_t g = 0; g < names.size(); ++g)
      if (names[g] == tok) { gen = static_cast<int>(g); break; }
    if (gen < 0) fail(errc::parse_error, "unknown generator '" + tok + "' in word '" + text + "'");
    w.push_back(Sym{gen, inv});
  }
  return reduce_word(w);
}

/// Exact matrix of a word given the generator matrices (inverses computed
/// exactly via unimodularity).
inline IntMatrix word_matrix(const Word& w, const std::vector<IntMatrix>& gens) {
  if (gens.empty()) fail(errc::bad_argument, "word_matrix needs at least one generator");
  IntMatrix m = IntMatrix::identity(gens[0].n());
  for (const Sym& s : w) {
    if (s.gen < 0 || s.gen >= static_cast<int>(gens.size()))
      fail(errc::bad_argument, "generator index out of range in word");
    m = m * (s.inv ? gens[s.gen].inverse() : gens[s.gen]);
  }
  return m;
}

/// All freely reduced words of length 1..max_len over k generators, ordered by
/// length then lexicographically with symbol order g0 < g0^-1 < g1 < g1^-1 < ...
inline std::vector<Word> enumerate_reduced_words(int k, int max_len) {
  if (k < 1 || max_len < 1) fail(errc::bad_argument, "enumerate_reduced_words needs k,len >= 1");
  std::vector<Word> out;
  std::vector<Word> frontier;
  frontier.push_back(Word{});
  for (int len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (const Word& w : frontier) {
      for (int g = 0; g < k; ++g) {
        for (int inv = 0; inv < 2; ++inv) {
          const Sym s{g, inv != 0};
          if (!w.empty() && w.back().gen == s.gen && w.back().inv != s.inv) continue;
          Word ext = w;
          ext.push_back(s);
          next.push_back(std::move(ext));
        }
      }
    }
    for (const Word& w : next) out.push_back(w);
    frontier = std::move(next);
  }
  return out;
}

}  // namespace semiconj
