#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "covergap/symmetric_group.hpp"
#include "doctest.h"

using namespace covergap;

namespace {

std::vector<Permutation> all_perms(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  std::vector<Permutation> out;
  do out.emplace_back(v);
  while (std::next_permutation(v.begin(), v.end()));
  return out;
}

// Enumerates all 2g-tuples and keeps those satisfying the relation, keyed by
// the tuple of lexicographic permutation ranks.
std::map<std::vector<int>, std::size_t> enumerate_homs(int n, int g) {
  const auto perms = all_perms(n);
  const int f = static_cast<int>(perms.size());
  std::map<std::vector<int>, std::size_t> out;
  std::vector<int> idx(static_cast<std::size_t>(2 * g), 0);
  for (;;) {
    Permutation p = Permutation::identity(n);
    for (int i = 0; i < g; ++i) {
      const auto& a = perms[static_cast<std::size_t>(idx[static_cast<std::size_t>(2 * i)])];
      const auto& b = perms[static_cast<std::size_t>(idx[static_cast<std::size_t>(2 * i + 1)])];
      p = p * a * b * a.inverse() * b.inverse();
    }
    if (p.is_identity()) out.emplace(idx, out.size());
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == f) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return out;
}

int rank_of(const Permutation& p) {
  static std::map<std::vector<int>, int> cache;
  if (auto it = cache.find(p.images()); it != cache.end()) return it->second;
  int r = 0;
  for (const auto& q : all_perms(p.size())) {
    if (q == p) break;
    ++r;
  }
  cache.emplace(p.images(), r);
  return r;
}

std::vector<int> key_of(const HomTuple& t) {
  std::vector<int> k;
  for (const auto& g : t.gens) k.push_back(rank_of(g));
  return k;
}

// Pearson chi-square p-value against the uniform law on `cells` outcomes.
double uniform_p_value(const std::vector<std::size_t>& counts, std::size_t samples) {
  const double expected = static_cast<double>(samples) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (std::size_t c : counts) stat += (c - expected) * (c - expected) / expected;
  const double dof = static_cast<double>(counts.size() - 1);
  return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

std::int64_t sign_of_class(const Partition& mu) {
  int n = 0;
  for (int p : mu) n += p;
  return (n - static_cast<int>(mu.size())) % 2 == 0 ? 1 : -1;
}

}  // namespace

TEST_CASE("permutation basics") {
  const Permutation p = Permutation::from_one_line(std::vector<int>{2, 3, 1});
  CHECK(p(0) == 1);
  CHECK(p.one_line() == std::vector<int>{2, 3, 1});
  CHECK((p * p.inverse()).is_identity());
  CHECK(p.cycle_type() == std::vector<int>{3});
  CHECK_THROWS_AS(Permutation(std::vector<int>{0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(p * Permutation::identity(2), std::invalid_argument);
}

TEST_CASE("commutator") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Permutation a = Permutation::random(7, rng);
    CHECK(commutator(a, a).is_identity());
    CHECK(commutator(a, Permutation::identity(7)).is_identity());
  }
  CHECK_THROWS_AS(commutator(Permutation::identity(3), Permutation::identity(4)), std::invalid_argument);

  // n = 3, A = (1 2 3), B = (1 2), against an explicit multiplication table
  const auto perms = all_perms(3);
  std::vector<std::vector<std::size_t>> mul(6, std::vector<std::size_t>(6));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      std::vector<int> img(3);
      for (int x = 0; x < 3; ++x) img[static_cast<std::size_t>(x)] = perms[i](perms[j](x));
      mul[i][j] = static_cast<std::size_t>(std::find(perms.begin(), perms.end(), Permutation(img)) - perms.begin());
    }
  }
  auto inv = [&](std::size_t i) {
    for (std::size_t j = 0; j < 6; ++j)
      if (perms[mul[i][j]].is_identity()) return j;
    return std::size_t{99};
  };
  const Permutation a = Permutation::from_one_line(std::vector<int>{2, 3, 1});
  const Permutation b = Permutation::from_one_line(std::vector<int>{2, 1, 3});
  const auto ia = static_cast<std::size_t>(rank_of(a));
  const auto ib = static_cast<std::size_t>(rank_of(b));
  const std::size_t table = mul[mul[mul[ia][ib]][inv(ia)]][inv(ib)];
  CHECK(commutator(a, b) == perms[table]);
  CHECK(commutator(a, b).one_line() == std::vector<int>{3, 1, 2});
}

TEST_CASE("character table: classical values") {
  const CharacterTable t3 = character_table(3);
  REQUIRE(t3.partitions == std::vector<Partition>{{3}, {2, 1}, {1, 1, 1}});
  CHECK(t3.chi == std::vector<std::vector<std::int64_t>>{{1, 1, 1}, {-1, 0, 2}, {1, -1, 1}});
  std::vector<std::int64_t> dims;
  for (std::size_t l = 0; l < 3; ++l) dims.push_back(t3.dimension(l));
  std::sort(dims.begin(), dims.end());
  CHECK(dims == std::vector<std::int64_t>{1, 1, 2});
  CHECK(t3.class_sizes == std::vector<BigInt>{2, 3, 1});

  const CharacterTable t4 = character_table(4);
  double inv_sq = 0.0;
  for (std::size_t l = 0; l < t4.class_count(); ++l) inv_sq += 1.0 / static_cast<double>(t4.dimension(l) * t4.dimension(l));
  CHECK(inv_sq == doctest::Approx(1.0 + 1.0 + 0.25 + 2.0 / 9.0).epsilon(1e-15));
  CHECK(inv_sq == doctest::Approx(2.47222).epsilon(1e-5));
}

TEST_CASE("property: character tables up to the cap") {
  for (int n = 1; n <= kDefaultSymmetricCap; ++n) {
    const CharacterTable t = character_table(n);
    BigInt dims = 0;
    BigInt classes = 0;
    for (std::size_t l = 0; l < t.class_count(); ++l) dims += BigInt(t.dimension(l)) * t.dimension(l);
    for (const auto& s : t.class_sizes) classes += s;
    CHECK(dims == t.group_order);
    CHECK(classes == t.group_order);
    for (std::int64_t v : t.chi.front()) CHECK(v == 1);
    // sign character and fixed points minus one, both closed forms
    const auto& sign = t.chi.back();
    for (std::size_t c = 0; c < t.class_count(); ++c) {
      CHECK(sign[c] == sign_of_class(t.partitions[c]));
      if (n >= 2) {
        const auto fixed = std::count(t.partitions[c].begin(), t.partitions[c].end(), 1);
        CHECK(t.chi[1][c] == fixed - 1);
      }
    }
  }
  CHECK_THROWS_AS(character_table(17), std::invalid_argument);
  CHECK_THROWS_AS(character_table(0), std::invalid_argument);
  CHECK_NOTHROW(character_table(5, 5));
  CHECK_THROWS_AS(character_table(6, 5), std::invalid_argument);
}

TEST_CASE("count_homs") {
  CHECK(count_homs(1, 2) == 1);
  CHECK(count_homs(2, 2) == 16);
  CHECK(count_homs(3, 2) == 486);
  CHECK(count_homs(4, 2) == 34176);
  CHECK(enumerate_homs(2, 2).size() == 16);
  CHECK(enumerate_homs(3, 2).size() == 486);
  CHECK(enumerate_homs(4, 2).size() == 34176);
  CHECK(enumerate_homs(3, 3).size() == count_homs(3, 3));
  // genus one counts commuting pairs: n! times the number of partitions
  const int partitions[] = {1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77, 101, 135, 176, 231};
  BigInt f = 1;
  for (int n = 1; n <= 16; ++n) {
    f *= n;
    CHECK(count_homs(n, 1) == f * partitions[n]);
  }
  CHECK_THROWS_AS(count_homs(3, 0), std::invalid_argument);
}

TEST_CASE("sampler counts agree with the character formula") {
  for (int n : {2, 5, 9}) {
    const HomSampler s(n, 2);
    CHECK(s.hom_count() == count_homs(n, 2));
    // M(c) summed over all elements of S_n counts all pairs
    BigInt pairs = 0;
    for (std::size_t c = 0; c < s.table().class_count(); ++c) pairs += s.table().class_sizes[c] * s.commutator_count(1, c);
    CHECK(pairs == s.table().group_order * s.table().group_order);
  }
  // N_{R,S}(q) against brute force in S_4
  const HomSampler s(4, 2);
  const auto perms = all_perms(4);
  const auto& t = s.table();
  for (std::size_t q = 0; q < t.class_count(); ++q) {
    Permutation rep;
    for (const auto& p : perms)
      if (p.cycle_type() == t.partitions[q]) rep = p;
    for (std::size_t r = 0; r < t.class_count(); ++r) {
      for (std::size_t c = 0; c < t.class_count(); ++c) {
        int brute = 0;
        for (const auto& x : perms)
          if (x.cycle_type() == t.partitions[r] && (x.inverse() * rep).cycle_type() == t.partitions[c]) ++brute;
        CHECK(s.factorization_count(r, c, q) == brute);
      }
    }
  }
}

TEST_CASE("sampler: relation always holds and output is deterministic") {
  for (int n : {1, 6, 12, 16}) {
    const HomSampler s(n, 2);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const HomTuple h = s.sample(seed);
      CHECK(h.relation_ok);
      CHECK(h.seed == seed);
      CHECK(h.gens.size() == 4);
    }
    CHECK(s.sample(std::uint64_t{7}).gens == s.sample(std::uint64_t{7}).gens);
  }
  const HomTuple one = HomSampler(1, 2).sample(std::uint64_t{3});
  for (const auto& g : one.gens) CHECK(g.is_identity());
}

TEST_CASE("sampler uniformity: chi-square against enumeration, g = 2") {
  for (int n : {2, 3, 4}) {
    const auto homs = enumerate_homs(n, 2);
    const HomSampler s(n, 2);
    Rng rng(1000 + static_cast<std::uint64_t>(n));
    const std::size_t samples = 100000;
    std::vector<std::size_t> counts(homs.size(), 0);
    for (std::size_t i = 0; i < samples; ++i) {
      const HomTuple h = s.sample(rng);
      REQUIRE(h.relation_ok);
      const auto it = homs.find(key_of(h));
      REQUIRE(it != homs.end());
      ++counts[it->second];
    }
    const double p = uniform_p_value(counts, samples);
    MESSAGE("n = " << n << " chi-square p = " << p);
    CHECK(p >= 0.01);
  }
}

TEST_CASE("sampler uniformity: genus 3 exercises the backward bridge") {
  const auto homs = enumerate_homs(3, 3);
  const HomSampler s(3, 3);
  Rng rng(1);
  const std::size_t samples = 200000;
  std::vector<std::size_t> counts(homs.size(), 0);
  for (std::size_t i = 0; i < samples; ++i) ++counts[homs.at(key_of(s.sample(rng)))];
  CHECK(uniform_p_value(counts, samples) >= 0.01);
}

TEST_CASE("exhaustive fallback is uniform and the cap is enforced") {
  SamplerOptions opts;
  opts.retry_cap = 0;
  const HomSampler s(3, 2, opts);
  const auto homs = enumerate_homs(3, 2);
  Rng rng(5);
  const std::size_t samples = 50000;
  std::vector<std::size_t> counts(homs.size(), 0);
  for (std::size_t i = 0; i < samples; ++i) ++counts[homs.at(key_of(s.sample(rng)))];
  CHECK(uniform_p_value(counts, samples) >= 0.01);

  const HomSampler big(9, 2, opts);
  CHECK_THROWS_AS(big.sample(std::uint64_t{1}), SamplingFailure);
}

TEST_CASE("rejection baseline") {
  const auto homs = enumerate_homs(3, 2);
  Rng rng(9);
  const std::size_t samples = 50000;
  std::vector<std::size_t> counts(homs.size(), 0);
  for (std::size_t i = 0; i < samples; ++i) ++counts[homs.at(key_of(sample_by_rejection(3, 2, rng)))];
  CHECK(uniform_p_value(counts, samples) >= 0.01);
  CHECK_THROWS_AS(sample_by_rejection(6, 2, rng), std::invalid_argument);
}

TEST_CASE("commutator pairs are uniform over the fiber") {
  const HomSampler s(4, 2);
  const auto perms = all_perms(4);
  Rng rng(11);
  for (const Permutation& c : {Permutation::from_one_line(std::vector<int>{2, 3, 1, 4}),
                               Permutation::from_one_line(std::vector<int>{2, 1, 4, 3}), Permutation::identity(4)}) {
    std::map<std::pair<int, int>, std::size_t> fiber;
    for (const auto& a : perms)
      for (const auto& b : perms)
        if (commutator(a, b) == c) fiber.emplace(std::make_pair(rank_of(a), rank_of(b)), fiber.size());
    std::vector<std::size_t> counts(fiber.size(), 0);
    const std::size_t samples = 20 * fiber.size();
    for (std::size_t i = 0; i < samples; ++i) {
      const auto [a, b] = s.sample_commutator_pair(c, rng);
      REQUIRE(commutator(a, b) == c);
      ++counts[fiber.at({rank_of(a), rank_of(b)})];
    }
    CHECK(uniform_p_value(counts, samples) >= 0.01);
  }
}

TEST_CASE("conjugator and centralizer") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Permutation x = Permutation::random(9, rng);
    const Permutation s = Permutation::random(9, rng);
    const Permutation y = s * x * s.inverse();
    const Permutation b = conjugator(x, y);
    CHECK(b * x * b.inverse() == y);
    const Permutation z = random_centralizer_element(x, rng);
    CHECK(z * x == x * z);
  }
  CHECK_THROWS_AS(conjugator(Permutation::identity(3), Permutation::from_one_line(std::vector<int>{2, 1, 3})),
                  std::invalid_argument);
  // (1 2)(3 4) in S_4 has a centralizer of order 8
  const Permutation x = Permutation::from_one_line(std::vector<int>{2, 1, 4, 3});
  std::map<std::vector<int>, std::size_t> seen;
  for (const auto& p : all_perms(4))
    if (p * x == x * p) seen.emplace(p.images(), seen.size());
  REQUIRE(seen.size() == 8);
  std::vector<std::size_t> counts(8, 0);
  for (int i = 0; i < 8000; ++i) ++counts[seen.at(random_centralizer_element(x, rng).images())];
  CHECK(uniform_p_value(counts, 8000) >= 0.01);
}

TEST_CASE("uniform_below and weighted_choice") {
  Rng rng(4);
  const BigInt bound = BigInt(1) << 100;
  for (int i = 0; i < 100; ++i) {
    const BigInt x = uniform_below(bound, rng);
    CHECK(x >= 0);
    CHECK(x < bound);
  }
  CHECK_THROWS_AS(uniform_below(0, rng), std::invalid_argument);
  const std::vector<BigInt> w{0, 3, 0, 1};
  std::vector<std::size_t> counts(4, 0);
  for (int i = 0; i < 4000; ++i) ++counts[weighted_choice(w, rng)];
  CHECK(counts[0] == 0);
  CHECK(counts[2] == 0);
  CHECK(std::abs(static_cast<double>(counts[1]) / 4000.0 - 0.75) < 0.03);
}

TEST_CASE("transitivity") {
  const HomTuple id = make_hom_tuple(2, std::vector<Permutation>(4, Permutation::identity(2)));
  CHECK(id.relation_ok);
  CHECK(!id.transitive);
  std::vector<int> cyc{2, 3, 4, 5, 1};
  const Permutation c = Permutation::from_one_line(cyc);
  const HomTuple t = make_hom_tuple(2, {c, c, Permutation::identity(5), Permutation::identity(5)});
  CHECK(t.relation_ok);
  CHECK(t.transitive);
  CHECK(transitivity(t));
}

TEST_CASE("property: transitive fraction grows with n") {
  std::vector<double> frac;
  for (int n : {4, 8, 16}) {
    const HomSampler s(n, 2);
    Rng rng(2024);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += s.sample(rng).transitive ? 1 : 0;
    frac.push_back(hits / 10000.0);
    MESSAGE("n = " << n << " transitive fraction " << frac.back());
  }
  CHECK(frac[0] <= frac[1]);
  CHECK(frac[1] <= frac[2]);
  CHECK(frac[1] > 0.9);
}

TEST_CASE("word evaluation and the standard action") {
  const SurfacePresentation p(2);
  const HomSampler s(7, 2);
  Rng rng(8);
  const HomTuple h = s.sample(rng);
  CHECK(evaluate(h, p.relator()).is_identity());
  CHECK(std_action(h, p.relator()).permutation().is_identity());
  CHECK(evaluate(h, Word{1}) == h.gens[0]);
  CHECK(evaluate(h, Word{-4}) == h.gens[3].inverse());
  CHECK_THROWS_AS(evaluate(h, Word{5}), std::invalid_argument);

  // homomorphism: rho(uv) = rho(u) rho(v) on the full fiber
  const Word u{1, 2, -3};
  const Word v{4, -1};
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
  const auto lhs = std_action(h, u * v).apply(x);
  const auto rhs = std_action(h, u).apply(std_action(h, v).apply(x));
  for (std::size_t i = 0; i < 7; ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-14));
}

TEST_CASE("property: the action preserves mean zero and norms") {
  const HomSampler s(9, 2);
  Rng rng(10);
  const HomTuple h = s.sample(rng);
  std::normal_distribution<double> nd;
  std::vector<double> x(9);
  for (double& v : x) v = nd(rng);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / 9.0;
  for (double& v : x) v -= mean;
  const double norm0 = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
  std::uniform_int_distribution<int> letter(1, 4);
  for (int i = 0; i < 10000; ++i) {
    const int l = letter(rng) * (rng() % 2 == 0 ? 1 : -1);
    x = std_action(h, Word{l}).apply(x);
    CHECK(std::abs(std::accumulate(x.begin(), x.end(), 0.0)) <= 1e-12);
  }
  const double norm1 = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
  CHECK(norm1 == doctest::Approx(norm0).epsilon(1e-12));
  // a single action is an exact coordinate permutation of a mean-zero vector
  std::vector<double> y{1.0, -2.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0};
  const auto z = std_action(h, Word{1}).apply(y);
  std::vector<double> ys = y, zs = z;
  std::sort(ys.begin(), ys.end());
  std::sort(zs.begin(), zs.end());
  CHECK(ys == zs);
}

TEST_CASE("Helmert coordinates") {
  const int n = 6;
  // explicit basis rows are orthonormal and mean zero
  for (int k = 1; k < n; ++k) {
    std::vector<double> y(n - 1, 0.0);
    y[static_cast<std::size_t>(k - 1)] = 1.0;
    const auto row = from_helmert(y);
    CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0)) <= 1e-15);
    CHECK(std::inner_product(row.begin(), row.end(), row.begin(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    for (int j = 0; j < n; ++j) {
      const double expect = j < k ? 1.0 : (j == k ? -k : 0.0);
      CHECK(row[static_cast<std::size_t>(j)] == doctest::Approx(expect / std::sqrt(k * (k + 1.0))).epsilon(1e-14));
    }
  }
  const std::vector<double> x{0.5, -1.0, 2.0, 0.0, -1.0, -0.5};
  const auto back = from_helmert(helmert_coordinates(x));
  for (int j = 0; j < n; ++j) CHECK(back[static_cast<std::size_t>(j)] == doctest::Approx(x[static_cast<std::size_t>(j)]).epsilon(1e-14));

  const HomSampler s(n, 2);
  const HomTuple h = s.sample(std::uint64_t{2});
  const StdAction a = std_action(h, Word{1, 2});
  CHECK(a.dimension() == n - 1);
  const auto via_full = helmert_coordinates(a.apply(x));
  const auto via_helmert = a.apply_helmert(helmert_coordinates(x));
  for (int k = 0; k < n - 1; ++k) CHECK(via_full[static_cast<std::size_t>(k)] == doctest::Approx(via_helmert[static_cast<std::size_t>(k)]).epsilon(1e-13));
}

TEST_CASE("HomTuple JSON round trip") {
  const HomSampler s(5, 2);
  const HomTuple h = s.sample(std::uint64_t{42});
  const nlohmann::json j = to_json(h);
  CHECK(j["n"] == 5);
  CHECK(j["genus"] == 2);
  CHECK(j["seed"] == 42);
  CHECK(j["relation_ok"] == true);
  CHECK(j["gens"][0].size() == 5);
  const HomTuple back = hom_tuple_from_json(j);
  CHECK(back.gens == h.gens);
  CHECK(back.transitive == h.transitive);
  CHECK(back.seed == 42);
}
