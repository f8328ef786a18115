#pragma once

// Permutations, S_n character tables, exact uniform sampling of
// Hom(surface group, S_n) and the standard representation on V_n^0.

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include "covergap/surface_group.hpp"

namespace covergap {

using BigInt = boost::multiprecision::cpp_int;
using Rng = std::mt19937_64;

/// A bijection of {0, ..., n-1}; products compose right to left,
/// (p * q)(x) = p(q(x)). Text and JSON forms are 1-based.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> images);
  static Permutation identity(int n);
  /// From 1-based one-line notation.
  static Permutation from_one_line(std::span<const int> images);
  static Permutation random(int n, Rng& rng);

  int size() const noexcept { return static_cast<int>(images_.size()); }
  int operator()(int x) const { return images_[static_cast<std::size_t>(x)]; }
  const std::vector<int>& images() const noexcept { return images_; }
  std::vector<int> one_line() const;

  Permutation operator*(const Permutation& rhs) const;
  Permutation inverse() const;
  bool is_identity() const noexcept;
  /// Cycle lengths in nonincreasing order.
  std::vector<int> cycle_type() const;
  /// Cycles as orbits x, p(x), p(p(x)), ... ordered by length (descending)
  /// then smallest element.
  std::vector<std::vector<int>> cycles() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> images_;
};

/// A B A^-1 B^-1
Permutation commutator(const Permutation& a, const Permutation& b);

using Partition = std::vector<int>;

struct CharacterTable {
  int n = 0;
  /// Partitions in reverse lexicographic order: (n) first, (1^n) last. Used
  /// both for irreducibles (rows) and cycle types (columns).
  std::vector<Partition> partitions;
  std::vector<BigInt> class_sizes;
  /// chi[lambda][mu]
  std::vector<std::vector<std::int64_t>> chi;
  BigInt group_order;

  std::size_t class_count() const noexcept { return partitions.size(); }
  std::size_t class_index(const Partition& cycle_type) const;
  std::int64_t dimension(std::size_t lambda) const { return chi[lambda].back(); }
  std::size_t identity_class() const noexcept { return partitions.size() - 1; }
};

inline constexpr int kDefaultSymmetricCap = 16;

/// Murnaghan-Nakayama with memoization; both orthogonality relations are
/// verified exactly before returning.
CharacterTable character_table(int n, int cap = kDefaultSymmetricCap);

/// |Hom(surface group of genus g, S_n)| = (n!)^(2g-1) sum_lambda d^(2-2g).
BigInt count_homs(int n, int genus, int cap = kDefaultSymmetricCap);

struct HomTuple {
  int n = 0;
  int genus = 0;
  /// Images of a_1, b_1, ..., a_g, b_g.
  std::vector<Permutation> gens;
  bool relation_ok = false;
  bool transitive = false;
  std::uint64_t seed = 0;
};

/// prod [gens_{2i-1}, gens_{2i}] == identity
bool relation_holds(std::span<const Permutation> gens);
/// The generated subgroup acts transitively on {0, ..., n-1}.
bool transitivity(const HomTuple& t);
/// Fills relation_ok and transitive.
HomTuple make_hom_tuple(int genus, std::vector<Permutation> gens, std::uint64_t seed = 0);

/// phi(word), evaluated left to right through the tuple.
Permutation evaluate(const HomTuple& t, const Word& w);

nlohmann::json to_json(const HomTuple& t);
HomTuple hom_tuple_from_json(const nlohmann::json& j);

class SamplingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SamplerOptions {
  int cap = kDefaultSymmetricCap;
  /// Rejection attempts for one in-class factorization before falling back.
  std::int64_t retry_cap = 10'000'000;
  /// Exhaustive in-class search is allowed up to this n.
  int exhaustive_max_n = 8;
};

/// Exact uniform sampler over Hom(surface group of genus g, S_n).
///
/// Sequential class-resolved scheme. With P_k = prod_{i<=k} [A_i, B_i] and
/// P_g = 1, going down from k = g the pair (class of P_{k-1}, class of
/// [A_k, B_k]) is drawn with weight N_{R,S}(P_k) N_{k-1}(R) M(S), where
/// N_{R,S}(q) counts r in R, s in S with r s = q, N_j counts j-fold
/// commutator products and M = N_1. The factorization q = r s is drawn by
/// rejection, then (A_k, B_k) uniformly among pairs with [A, B] = s. All
/// weights are exact integers.
class HomSampler {
 public:
  HomSampler(int n, int genus, SamplerOptions opts = {});

  int n() const noexcept { return n_; }
  int genus() const noexcept { return genus_; }
  const CharacterTable& table() const noexcept { return *table_; }
  /// count_homs(n, g)
  const BigInt& hom_count() const noexcept { return hom_count_; }

  HomTuple sample(Rng& rng) const;
  HomTuple sample(std::uint64_t seed) const;

  /// Uniform (A, B) with A B A^-1 B^-1 = c.
  std::pair<Permutation, Permutation> sample_commutator_pair(const Permutation& c, Rng& rng) const;

  /// N_j(C) for j = 0..genus, indexed by class.
  const BigInt& commutator_count(int j, std::size_t cls) const { return n_commutators_.at(static_cast<std::size_t>(j)).at(cls); }
  /// #{(r, s) : r in R, s in S, r s = q} for q in class Q.
  BigInt factorization_count(std::size_t r, std::size_t s, std::size_t q) const;

 private:
  std::pair<Permutation, Permutation> factor(const Permutation& q, std::size_t r_cls, std::size_t s_cls, Rng& rng) const;
  Permutation random_in_class(std::size_t cls, Rng& rng) const;
  std::size_t class_of(const Permutation& p) const;
  /// [R][S] -> N_{R,S}(q) M(S)
  std::vector<std::vector<BigInt>> step_weights(std::size_t q) const;

  int n_;
  int genus_;
  SamplerOptions opts_;
  std::shared_ptr<const CharacterTable> table_;
  std::vector<Permutation> representatives_;
  /// n! / d_lambda
  std::vector<BigInt> codims_;
  std::vector<std::vector<BigInt>> n_commutators_;
  BigInt hom_count_;
  /// [class of c][K]
  std::vector<std::vector<BigInt>> commutator_weights_;
  std::vector<std::vector<BigInt>> identity_step_weights_;
  std::map<Partition, std::size_t> class_lookup_;
};

/// Global rejection: 2g uniform permutations until the relation holds.
/// Restricted to n <= 5.
HomTuple sample_by_rejection(int n, int genus, Rng& rng);

/// Conjugator b with b x b^-1 = y, x and y of equal cycle type.
Permutation conjugator(const Permutation& x, const Permutation& y);
/// Uniform element of the centralizer of x.
Permutation random_centralizer_element(const Permutation& x, Rng& rng);

/// Uniform integer in [0, bound).
BigInt uniform_below(const BigInt& bound, Rng& rng);
/// Index drawn with probability proportional to nonnegative weights.
std::size_t weighted_choice(std::span<const BigInt> weights, Rng& rng);

/// x -> x o phi(gamma)^-1 on C^n, restricted to V_n^0.
class StdAction {
 public:
  explicit StdAction(Permutation pi) : pi_(std::move(pi)) {}

  const Permutation& permutation() const noexcept { return pi_; }
  int dimension() const noexcept { return pi_.size() - 1; }

  /// Full fiber: y[i] = x[pi^-1(i)], then projection onto mean zero.
  std::vector<double> apply(std::span<const double> x) const;
  /// Helmert coordinates of V_n^0 in and out.
  std::vector<double> apply_helmert(std::span<const double> y) const;

 private:
  Permutation pi_;
};

StdAction std_action(const HomTuple& t, const Word& gamma);

/// Orthonormal Helmert basis of V_n^0: row k (1 <= k < n) is
/// (1, ..., 1, -k, 0, ..., 0) / sqrt(k (k + 1)) with k leading ones.
std::vector<double> helmert_coordinates(std::span<const double> x);
std::vector<double> from_helmert(std::span<const double> y);

}  // namespace covergap
