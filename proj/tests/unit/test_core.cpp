#include "helpers.hpp"

using namespace semiconj;

TEST_CASE("integer matrices: exact determinant and unimodularity", "[core]") {
  REQUIRE(IntMatrix::identity(3).determinant() == 1);

  IntMatrix unipotent = parse_matrix("1,1;0,1");
  REQUIRE(unipotent.determinant() == 1);
  REQUIRE(unipotent.is_unimodular());

  IntMatrix cat = parse_matrix("2,1;1,1");
  REQUIRE(cat.determinant() == 1);

  IntMatrix swap = parse_matrix("0,1;1,0");
  REQUIRE(swap.determinant() == -1);
  REQUIRE(swap.is_unimodular());

  IntMatrix stretched = parse_matrix("1,0;0,2");
  REQUIRE(stretched.determinant() == 2);
  REQUIRE_FALSE(stretched.is_unimodular());
  REQUIRE_FAILS_WITH(stretched.require_unimodular(), errc::not_unimodular);
  REQUIRE_FAILS_WITH(stretched.inverse(), errc::not_unimodular);
}

TEST_CASE("integer matrices: exact inverse of seeded elementary products", "[core]") {
  for (std::uint32_t seed : {1u, 2u, 3u, 4u, 5u}) {
    for (int n : {2, 3, 4}) {
      const IntMatrix m = testutil::random_unimodular(n, seed);
      REQUIRE(m.determinant() == 1);  // every factor has determinant exactly 1
      REQUIRE(m * m.inverse() == IntMatrix::identity(n));
      REQUIRE(m.inverse() * m == IntMatrix::identity(n));
    }
  }
}

TEST_CASE("matrix parsing and round trip", "[core]") {
  const IntMatrix a = parse_matrix("2,1;1,1");
  REQUIRE(a.n() == 2);
  REQUIRE(a(0, 0) == 2);
  REQUIRE(a(1, 1) == 1);
  REQUIRE(parse_matrix(a.to_string()) == a);

  REQUIRE_FAILS_WITH(parse_matrix("1,2;3"), errc::parse_error);
  REQUIRE_FAILS_WITH(parse_matrix("1,x;0,1"), errc::parse_error);
  REQUIRE_FAILS_WITH(parse_matrix(""), errc::parse_error);
}

TEST_CASE("word parsing, reduction, and printing", "[core]") {
  const std::vector<std::string> names{"a", "b"};

  const Word w = parse_word("a b^-1", names);
  REQUIRE(w.size() == 2);
  REQUIRE(w[0].gen == 0);
  REQUIRE_FALSE(w[0].inv);
  REQUIRE(w[1].gen == 1);
  REQUIRE(w[1].inv);
  REQUIRE(word_to_string(w, names) == "a b^-1");

  // parse reduces: a a^-1 cancels to the empty word, printed as "e".
  REQUIRE(parse_word("a a^-1", names).empty());
  REQUIRE(word_to_string(Word{}, names) == "e");
  REQUIRE(parse_word("e", names).empty());

  REQUIRE_FAILS_WITH(parse_word("a c", names), errc::parse_error);

  const Word ab = parse_word("a b", names);
  REQUIRE(word_inverse(ab) == parse_word("b^-1 a^-1", names));
  // concatenation reduces across the seam
  REQUIRE(word_concat(ab, parse_word("b^-1", names)) == parse_word("a", names));
  REQUIRE(word_concat(ab, word_inverse(ab)).empty());
}

TEST_CASE("reduced word enumeration is ordered and cancellation-free", "[core]") {
  const auto words = enumerate_reduced_words(2, 2);
  // 4 words of length 1 plus 4*3 of length 2.
  REQUIRE(words.size() == 16);
  const std::vector<std::string> names{"a", "b"};
  REQUIRE(word_to_string(words[0], names) == "a");
  REQUIRE(word_to_string(words[1], names) == "a^-1");
  REQUIRE(word_to_string(words[2], names) == "b");
  REQUIRE(word_to_string(words[3], names) == "b^-1");
  REQUIRE(word_to_string(words[4], names) == "a a");
  for (const Word& w : words) REQUIRE(reduce_word(w) == w);
  // monotone in length, lexicographic within a length
  for (std::size_t i = 1; i < words.size(); ++i)
    REQUIRE(words[i - 1].size() <= words[i].size());
}

TEST_CASE("word matrices: exact products and inverses", "[core]") {
  const std::vector<IntMatrix> sanov = sanov_matrices();
  const std::vector<std::string> names{"a", "b"};

  // a = [[1,2],[0,1]], b = [[1,0],[2,1]]: ab = [[5,2],[2,1]]
  const IntMatrix ab = word_matrix(parse_word("a b", names), sanov);
  REQUIRE(ab == parse_matrix("5,2;2,1"));

  // elementary pair: E12(1) E21(1) = [[2,1],[1,1]]
  const std::vector<IntMatrix> el{parse_matrix("1,1;0,1"), parse_matrix("1,0;1,1")};
  REQUIRE(word_matrix(parse_word("a b", names), el) == parse_matrix("2,1;1,1"));
  REQUIRE(word_matrix(parse_word("b a", names), el) == parse_matrix("1,1;1,2"));

  // inverse letters use the exact integer inverse
  const IntMatrix aInv = word_matrix(parse_word("a^-1", names), sanov);
  REQUIRE(aInv * sanov[0] == IntMatrix::identity(2));

  // empty word is the identity
  REQUIRE(word_matrix(Word{}, sanov) == IntMatrix::identity(2));
}

TEST_CASE("word matrices guard against integer overflow", "[core]") {
  const std::vector<IntMatrix> gens{parse_matrix("2,1;1,1")};
  Word huge;
  for (int i = 0; i < 60; ++i) huge.push_back(Sym{0, false});
  REQUIRE_FAILS_WITH(word_matrix(huge, gens), errc::word_overflow);
}
