#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "covergap/realization.hpp"
#include "covergap/surface_group.hpp"
#include "doctest.h"

using namespace covergap;

namespace {

const FuchsianRealization& bolza() {
  static const FuchsianRealization real = build_bolza_realization();
  return real;
}

double max_entry(const Isometry& m) {
  double e = 1.0;
  for (double x : m.entries()) e = std::max(e, std::abs(x));
  return e;
}

Word random_word(std::mt19937_64& rng, int genus, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> gen(1, 2 * genus);
  std::bernoulli_distribution sign(0.5);
  std::vector<Letter> letters(len(rng));
  for (Letter& l : letters) l = sign(rng) ? gen(rng) : -gen(rng);
  return Word(letters);
}

// Every freely reduced word over +-1..+-2g of length exactly len.
void all_words(int genus, std::size_t len, std::vector<Letter>& cur, std::vector<Word>& out) {
  if (cur.size() == len) {
    out.emplace_back(cur);
    return;
  }
  for (Letter l = -2 * genus; l <= 2 * genus; ++l) {
    if (l == 0 || (!cur.empty() && cur.back() == -l)) continue;
    cur.push_back(l);
    all_words(genus, len, cur, out);
    cur.pop_back();
  }
}

}  // namespace

TEST_CASE("words reduce freely") {
  CHECK(Word{1, -1}.empty());
  CHECK(Word{2, 1, -1, 3} == Word{2, 3});
  const Word w{1, 2, -3};
  CHECK(w.inverse() == Word{3, -2, -1});
  CHECK((w * w.inverse()).empty());
  CHECK_THROWS_AS(Word({0}), std::invalid_argument);
}

TEST_CASE("presentation") {
  const SurfacePresentation p(2);
  CHECK(p.relator() == Word{1, 2, -1, -2, 3, 4, -3, -4});
  CHECK(p.relator_cycles().size() == 16);
  CHECK(p.to_string(Word{1, -4}) == "a1 b2^-1");
  CHECK_THROWS_AS(SurfacePresentation(1), std::invalid_argument);
}

TEST_CASE("dehn reduction") {
  const SurfacePresentation p(2);
  CHECK(dehn_reduce(p.relator(), p).empty());
  CHECK(dehn_reduce(p.relator().inverse(), p).empty());
  // five letters of the relator equal the inverse of the other three
  const Word five{1, 2, -1, -2, 3};
  CHECK(dehn_reduce(five, p) == Word{4, 3, -4});
  CHECK(is_dehn_reduced(dehn_reduce(five, p), p));
  CHECK(!is_dehn_reduced(five, p));
  CHECK(dehn_reduce(Word{1, 2}, p) == Word{1, 2});
  CHECK_THROWS_AS(dehn_reduce(Word{5}, p), std::invalid_argument);

  const SurfacePresentation p3(3);
  CHECK(dehn_reduce(p3.relator(), p3).empty());
}

TEST_CASE("property: w w^-1 and conjugated relators reduce to the identity") {
  const SurfacePresentation p(2);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 10000; ++i) {
    const Word w = random_word(rng, 2, 50);
    // concatenate without the free reduction the product would apply
    std::vector<Letter> raw = w.letters();
    const auto inv = w.inverse().letters();
    raw.insert(raw.end(), inv.begin(), inv.end());
    CHECK(dehn_reduce(Word(raw), p).empty());
  }
  std::uniform_int_distribution<std::size_t> rot(0, 15);
  for (int i = 0; i < 1000; ++i) {
    const Word u = random_word(rng, 2, 20);
    const Word r(p.relator_cycles()[rot(rng)]);
    CHECK(dehn_reduce(u * r * u.inverse(), p).empty());
  }
}

TEST_CASE("property: dehn result is reduced and represents the same element") {
  const auto& real = bolza();
  const auto& p = real.presentation;
  std::mt19937_64 rng(22);
  for (int i = 0; i < 10000; ++i) {
    const Word w = random_word(rng, 2, 12);
    const Word d = dehn_reduce(w, p);
    CHECK(d.size() <= w.size());
    CHECK(is_dehn_reduced(d, p));
    const Isometry mw = evaluate(w, real);
    CHECK(evaluate(d, real).approx_equal(mw, 1e-9 * max_entry(mw)));
  }
}

TEST_CASE("dehn identity test agrees with matrix evaluation on all words of length <= 6") {
  const auto& real = bolza();
  std::vector<Word> words;
  std::vector<Letter> cur;
  for (std::size_t len = 0; len <= 6; ++len) all_words(2, len, cur, words);
  CHECK(words.size() == 1 + 8 + 56 + 392 + 2744 + 19208 + 134456);
  std::size_t identities = 0;
  std::size_t mismatches = 0;
  for (const Word& w : words) {
    const bool by_dehn = dehn_reduce(w, real.presentation).empty();
    const bool by_matrix = evaluate(w, real).is_identity(1e-6);
    identities += by_dehn;
    mismatches += by_dehn != by_matrix;
  }
  CHECK(mismatches == 0);
  CHECK(identities == 1);  // the relator has length 8
}

TEST_CASE("bolza realization") {
  const auto& real = bolza();
  const double sqrt2 = std::numbers::sqrt2;
  CHECK(evaluate(real.presentation.relator(), real).is_identity(1e-8));
  CHECK(evaluate(Word{}, real).is_identity(0.0));
  CHECK(evaluate(Word{1, -1}, real).is_identity(0.0));
  for (const auto& g : real.generator_matrices) {
    CHECK(std::abs(g.trace()) == doctest::Approx(2.0 * (1.0 + sqrt2)).epsilon(1e-12));
    CHECK(g.translation_length() == doctest::Approx(2.0 * std::acosh(1.0 + sqrt2)).epsilon(1e-12));
  }
  CHECK(real.side_pairings.size() == 8);
  CHECK(real.domain_vertices.size() == 8);
  CHECK(polygon_area(real.domain_vertices) == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-10));
  CHECK(polygon_contains(real.domain_vertices, real.base_point));
  CHECK(real.domain_radius == doctest::Approx(std::acosh(3.0 + 2.0 * sqrt2)).epsilon(1e-12));
  double max_pair = 0.0;
  for (const auto& u : real.domain_vertices)
    for (const auto& v : real.domain_vertices) max_pair = std::max(max_pair, distance(u, v));
  CHECK(real.domain_diameter >= max_pair);
  CHECK(real.domain_diameter == doctest::Approx(2.0 * real.domain_radius).epsilon(1e-10));
}

TEST_CASE("side pairings glue the octagon to its neighbours") {
  const auto& real = bolza();
  const auto& v = real.domain_vertices;
  for (std::size_t k = 0; k < 8; ++k) {
    const Isometry& s = real.side_pairings[k].matrix;
    // pairing k sends side k + 4 onto side k with reversed orientation
    const HPoint p = apply(s, v[(k + 4) % 8]);
    const HPoint q = apply(s, v[(k + 5) % 8]);
    CHECK(distance(p, v[(k + 1) % 8]) <= 1e-9);
    CHECK(distance(q, v[k]) <= 1e-9);
    // the image tile lies across side k: its centre fails the polygon test
    CHECK(!polygon_contains(v, apply(s, real.base_point)));
    CHECK(real.side_pairings[(k + 4) % 8].matrix.approx_equal(s.inverse(), 1e-12));
  }
}

TEST_CASE("lattice points") {
  const auto& real = bolza();
  const SupportSet zero = lattice_points(real, 0.0);
  REQUIRE(zero.size() == 1);
  CHECK(zero.elements[0].word.empty());
  CHECK_THROWS_AS(lattice_points(real, 12.5), std::invalid_argument);
  CHECK_THROWS_AS(lattice_points(real, -1.0), std::invalid_argument);

  std::size_t prev = 0;
  for (double R : {0.0, 1.0, 2.0, 3.0, 3.06, 4.0, 5.0, 6.0}) {
    const SupportSet s = lattice_points(real, R);
    CHECK(s.size() >= prev);
    prev = s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& e = s.elements[i];
      CHECK(e.displacement <= R);
      CHECK(evaluate(e.word, real).approx_equal(e.matrix, 1e-9 * max_entry(e.matrix)));
      CHECK((e.matrix * s.elements[s.inverse_of[i]].matrix).is_identity(1e-8 * std::exp(R)));
    }
  }
  // 2 * inradius is the shortest displacement, attained by the 8 side pairings
  CHECK(lattice_points(real, 3.05).size() == 1);
  CHECK(lattice_points(real, 3.06).size() == 9);
}

TEST_CASE("lattice count at R = 4 matches brute-force word enumeration") {
  const auto& real = bolza();
  constexpr double R = 4.0;
  // orbit of the base point under all side-pairing words up to a given length,
  // deduplicated by rounded sign-normalized matrix entries
  auto brute = [&](int depth) {
    std::set<std::array<long long, 4>> seen;
    std::vector<std::pair<Isometry, int>> frontier{{Isometry::identity(), -1}};
    auto add = [&](const Isometry& m) {
      if (distance(real.base_point, apply(m, real.base_point)) > R) return;
      const auto& e = m.sign_normalized().entries();
      seen.insert({std::llround(e[0] * 1e6), std::llround(e[1] * 1e6), std::llround(e[2] * 1e6),
                   std::llround(e[3] * 1e6)});
    };
    add(Isometry::identity());
    for (int d = 0; d < depth; ++d) {
      std::vector<std::pair<Isometry, int>> next;
      for (const auto& [m, last] : frontier) {
        for (int k = 0; k < 8; ++k) {
          if (last >= 0 && k == (last + 4) % 8) continue;
          const Isometry n = m * real.side_pairings[static_cast<std::size_t>(k)].matrix;
          add(n);
          next.emplace_back(n, k);
        }
      }
      frontier = std::move(next);
    }
    return seen.size();
  };
  const std::size_t d5 = brute(5);
  const std::size_t d6 = brute(6);
  CHECK(d5 == d6);
  CHECK(lattice_points(real, R).size() == d6);
}

TEST_CASE("property: lattice growth exponent is close to one") {
  const auto& real = bolza();
  std::vector<double> xs, ys;
  for (double R = 4.0; R <= 8.0; R += 0.5) {
    xs.push_back(R);
    ys.push_back(std::log(static_cast<double>(lattice_points(real, R).size())));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope >= 0.7);
  CHECK(slope <= 1.3);
}

TEST_CASE("support sets") {
  const auto& real = bolza();
  const SupportSet s0 = support_set(real, KernelRadius(0.0));
  CHECK(s0.elements[s0.identity_index()].word.empty());

  const SupportSet s1 = support_set(real, KernelRadius(1.0));
  for (const auto& sp : real.side_pairings) {
    const bool found = std::any_of(s1.elements.begin(), s1.elements.end(),
                                   [&](const GroupElement& e) { return e.matrix.approx_equal(sp.matrix, 1e-9); });
    CHECK(found);
  }
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1.inverse_of[s1.inverse_of[i]] == i);
    // geodesics of length at most 2(diam + t + 1)
    CHECK(s1.elements[i].displacement <= 2.0 * (real.domain_diameter + 1.0 + 1.0));
    // no duplicates
    for (std::size_t j = i + 1; j < s1.size(); ++j) {
      CHECK(!s1.elements[i].matrix.approx_equal(s1.elements[j].matrix, 1e-6));
    }
  }
  CHECK(max_word_length(s1, real.presentation) >= 1);

  // nested in t
  const SupportSet s2 = support_set(real, KernelRadius(1.5));
  CHECK(s2.size() >= s1.size());
  CHECK(s1.size() >= s0.size());
}

TEST_CASE("support set with explicit samples is contained in the boundary-sampled one") {
  const auto& real = bolza();
  // a few interior points: geodesic midpoints between the centre and the vertices
  std::vector<HPoint> interior{real.base_point};
  for (const auto& v : real.domain_vertices) {
    interior.push_back(geodesic_point(real.base_point, v, 0.5));
    interior.push_back(geodesic_point(real.base_point, v, 0.95));
  }
  const SupportSet coarse = support_set(real, KernelRadius(1.0), interior);
  const SupportSet fine = support_set(real, KernelRadius(1.0));
  for (const auto& e : coarse.elements) {
    const bool found = std::any_of(fine.elements.begin(), fine.elements.end(),
                                   [&](const GroupElement& f) { return f.matrix.approx_equal(e.matrix, 1e-6); });
    CHECK(found);
  }
  const HPoint outside = apply(real.side_pairings[0].matrix, real.base_point);
  const std::vector<HPoint> bad{outside};
  CHECK_THROWS_AS(support_set(real, KernelRadius(1.0), bad), std::invalid_argument);
}

TEST_CASE("support set json") {
  const auto& real = bolza();
  const SupportSet s = support_set(real, KernelRadius(0.5));
  const auto j = to_json(s, real.presentation);
  CHECK(j["elements"].size() == s.size());
  CHECK(j["elements"][0]["matrix"].size() == 4);
  CHECK(j["genus"] == 2);
}

TEST_CASE("tile ball against products of side pairings") {
  const FuchsianRealization& real = bolza();
  const SurfacePresentation& p = real.presentation;
  // Distinct elements among products of at most two side pairings, by Dehn.
  std::vector<Word> words{Word{}};
  for (const auto& s : real.side_pairings) {
    words.push_back(s.word);
    for (const auto& u : real.side_pairings) words.push_back(s.word * u.word);
  }
  std::vector<Word> distinct;
  for (const Word& w : words) {
    if (std::none_of(distinct.begin(), distinct.end(), [&](const Word& d) { return same_element(d, w, p); }))
      distinct.push_back(w);
  }
  const TileBall ball = tile_ball(real, 2);
  CHECK(ball.elements.size() == distinct.size());
  CHECK(ball.elements.size() == 65);
  CHECK(std::is_sorted(ball.depth.begin(), ball.depth.end()));
  for (const Word& w : distinct) {
    const auto hits = std::count_if(ball.elements.begin(), ball.elements.end(),
                                    [&](const GroupElement& g) { return same_element(g.word, w, p); });
    CHECK(hits == 1);
  }

  const ElementLookup lookup(real, ball.elements);
  for (std::size_t i = 0; i < ball.elements.size(); ++i) CHECK(lookup.find(ball.elements[i].matrix) == i);
  const TileBall bigger = tile_ball(real, 3);
  CHECK(bigger.elements.size() == 457);
  for (std::size_t i = ball.elements.size(); i < bigger.elements.size(); ++i)
    CHECK_FALSE(lookup.find(bigger.elements[i].matrix).has_value());
}
