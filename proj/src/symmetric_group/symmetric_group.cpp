#include "covergap/symmetric_group.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include <boost/pending/disjoint_sets.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace covergap {

namespace {

using Int128 = __int128;

BigInt to_big(Int128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
  BigInt out = static_cast<std::uint64_t>(u >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(u);
  return neg ? BigInt(-out) : out;
}

int uniform_int(int lo, int hi, Rng& rng) { return boost::random::uniform_int_distribution<int>(lo, hi)(rng); }

void partitions_into(int remaining, int max_part, Partition& cur, std::vector<Partition>& out) {
  if (remaining == 0) {
    out.push_back(cur);
    return;
  }
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    cur.push_back(p);
    partitions_into(remaining - p, p, cur, out);
    cur.pop_back();
  }
}

BigInt factorial(int n) {
  BigInt f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// z_mu = prod_k k^{m_k} m_k!
BigInt centralizer_order(const Partition& mu) {
  BigInt z = 1;
  std::map<int, int> mult;
  for (int p : mu) ++mult[p];
  for (auto [k, m] : mult) {
    for (int i = 0; i < m; ++i) z *= k;
    z *= factorial(m);
  }
  return z;
}

class MurnaghanNakayama {
 public:
  std::int64_t chi(const Partition& lambda, const Partition& mu) { return eval(lambda, mu, 0); }

 private:
  std::int64_t eval(const Partition& lambda, const Partition& mu, std::size_t from) {
    if (from == mu.size()) return lambda.empty() ? 1 : 0;
    const Partition rest(mu.begin() + static_cast<std::ptrdiff_t>(from), mu.end());
    const auto key = std::make_pair(lambda, rest);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    // rim hooks of length k <-> beads moved from b to b - k on the abacus
    const int k = mu[from];
    const auto len = static_cast<int>(lambda.size());
    std::vector<int> beta(lambda.size());
    for (int i = 0; i < len; ++i) beta[static_cast<std::size_t>(i)] = lambda[static_cast<std::size_t>(i)] + len - 1 - i;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < beta.size(); ++i) {
      const int target = beta[i] - k;
      if (target < 0 || std::find(beta.begin(), beta.end(), target) != beta.end()) continue;
      int between = 0;
      for (int b : beta) between += (b > target && b < beta[i]) ? 1 : 0;
      std::vector<int> moved = beta;
      moved[i] = target;
      std::sort(moved.rbegin(), moved.rend());
      Partition smaller;
      for (int j = 0; j < len; ++j) {
        const int part = moved[static_cast<std::size_t>(j)] - (len - 1 - j);
        if (part > 0) smaller.push_back(part);
      }
      const std::int64_t sub = eval(smaller, mu, from + 1);
      total += between % 2 == 0 ? sub : -sub;
    }
    memo_.emplace(key, total);
    return total;
  }

  std::map<std::pair<Partition, Partition>, std::int64_t> memo_;
};

void verify_orthogonality(const CharacterTable& t) {
  const std::size_t c = t.class_count();
  const auto order = static_cast<Int128>(static_cast<std::uint64_t>(t.group_order));
  std::vector<Int128> size(c);
  for (std::size_t i = 0; i < c; ++i) size[i] = static_cast<Int128>(static_cast<std::uint64_t>(t.class_sizes[i]));
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = a; b < c; ++b) {
      Int128 rows = 0;
      Int128 cols = 0;
      for (std::size_t k = 0; k < c; ++k) {
        rows += size[k] * t.chi[a][k] * t.chi[b][k];
        cols += static_cast<Int128>(t.chi[k][a]) * t.chi[k][b];
      }
      if (rows != (a == b ? order : 0)) throw std::logic_error("character table: row orthogonality failed");
      // sum_lambda chi(mu) chi(nu) = z_mu delta
      if (cols * (a == b ? size[a] : 1) != (a == b ? order : 0)) {
        throw std::logic_error("character table: column orthogonality failed");
      }
    }
  }
  Int128 dims = 0;
  for (std::size_t l = 0; l < c; ++l) dims += static_cast<Int128>(t.dimension(l)) * t.dimension(l);
  if (dims != order) throw std::logic_error("character table: sum of squared dimensions != n!");
  for (std::int64_t v : t.chi.front()) {
    if (v != 1) throw std::logic_error("character table: trivial row is not all ones");
  }
}

std::shared_ptr<const CharacterTable> shared_table(int n, int cap) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const CharacterTable>> cache;
  if (n < 1 || n > cap) {
    throw std::invalid_argument("character table: n = " + std::to_string(n) + " outside [1, " + std::to_string(cap) + "]");
  }
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;

  auto t = std::make_shared<CharacterTable>();
  t->n = n;
  Partition cur;
  partitions_into(n, n, cur, t->partitions);
  t->group_order = factorial(n);
  for (const Partition& mu : t->partitions) t->class_sizes.push_back(t->group_order / centralizer_order(mu));
  MurnaghanNakayama mn;
  for (const Partition& lambda : t->partitions) {
    std::vector<std::int64_t> row;
    for (const Partition& mu : t->partitions) row.push_back(mn.chi(lambda, mu));
    t->chi.push_back(std::move(row));
  }
  verify_orthogonality(*t);
  cache.emplace(n, t);
  return t;
}

}  // namespace

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  std::vector<char> seen(images_.size(), 0);
  for (int x : images_) {
    if (x < 0 || x >= size() || seen[static_cast<std::size_t>(x)]) throw std::invalid_argument("not a permutation");
    seen[static_cast<std::size_t>(x)] = 1;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return Permutation(std::move(v));
}

Permutation Permutation::from_one_line(std::span<const int> images) {
  std::vector<int> v(images.begin(), images.end());
  for (int& x : v) --x;
  return Permutation(std::move(v));
}

Permutation Permutation::random(int n, Rng& rng) {
  Permutation p = identity(n);
  for (int i = n - 1; i > 0; --i) std::swap(p.images_[static_cast<std::size_t>(i)], p.images_[static_cast<std::size_t>(uniform_int(0, i, rng))]);
  return p;
}

std::vector<int> Permutation::one_line() const {
  std::vector<int> v = images_;
  for (int& x : v) ++x;
  return v;
}

Permutation Permutation::operator*(const Permutation& rhs) const {
  if (size() != rhs.size()) throw std::invalid_argument("permutation size mismatch");
  Permutation out;
  out.images_.resize(images_.size());
  for (std::size_t x = 0; x < images_.size(); ++x) out.images_[x] = images_[static_cast<std::size_t>(rhs.images_[x])];
  return out;
}

Permutation Permutation::inverse() const {
  Permutation out;
  out.images_.resize(images_.size());
  for (std::size_t x = 0; x < images_.size(); ++x) out.images_[static_cast<std::size_t>(images_[x])] = static_cast<int>(x);
  return out;
}

bool Permutation::is_identity() const noexcept {
  for (std::size_t x = 0; x < images_.size(); ++x) {
    if (images_[x] != static_cast<int>(x)) return false;
  }
  return true;
}

std::vector<std::vector<int>> Permutation::cycles() const {
  std::vector<std::vector<int>> out;
  std::vector<char> seen(images_.size(), 0);
  for (std::size_t s = 0; s < images_.size(); ++s) {
    if (seen[s]) continue;
    std::vector<int> c;
    for (int x = static_cast<int>(s); !seen[static_cast<std::size_t>(x)]; x = images_[static_cast<std::size_t>(x)]) {
      seen[static_cast<std::size_t>(x)] = 1;
      c.push_back(x);
    }
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

std::vector<int> Permutation::cycle_type() const {
  std::vector<int> t;
  std::vector<char> seen(images_.size(), 0);
  for (std::size_t s = 0; s < images_.size(); ++s) {
    int len = 0;
    for (std::size_t x = s; !seen[x]; x = static_cast<std::size_t>(images_[x])) {
      seen[x] = 1;
      ++len;
    }
    if (len > 0) t.push_back(len);
  }
  std::sort(t.rbegin(), t.rend());
  return t;
}

Permutation commutator(const Permutation& a, const Permutation& b) { return a * b * a.inverse() * b.inverse(); }

std::size_t CharacterTable::class_index(const Partition& cycle_type) const {
  const auto it = std::find(partitions.begin(), partitions.end(), cycle_type);
  if (it == partitions.end()) throw std::invalid_argument("not a partition of n");
  return static_cast<std::size_t>(it - partitions.begin());
}

CharacterTable character_table(int n, int cap) { return *shared_table(n, cap); }

BigInt count_homs(int n, int genus, int cap) {
  if (genus < 1) throw std::invalid_argument("count_homs: genus must be at least 1");
  const auto t = shared_table(n, cap);
  BigInt total = 0;
  for (std::size_t l = 0; l < t->class_count(); ++l) {
    const BigInt d = t->dimension(l);
    total += d * boost::multiprecision::pow(BigInt(t->group_order / d), static_cast<unsigned>(2 * genus - 1));
  }
  return total;
}

bool relation_holds(std::span<const Permutation> gens) {
  if (gens.empty() || gens.size() % 2 != 0) throw std::invalid_argument("relation check needs 2g permutations");
  Permutation p = Permutation::identity(gens.front().size());
  for (std::size_t i = 0; i < gens.size(); i += 2) p = p * commutator(gens[i], gens[i + 1]);
  return p.is_identity();
}

bool transitivity(const HomTuple& t) {
  const auto n = static_cast<std::size_t>(t.n);
  std::vector<std::size_t> rank(n, 0), parent(n);
  boost::disjoint_sets<std::size_t*, std::size_t*> sets(rank.data(), parent.data());
  for (std::size_t x = 0; x < n; ++x) sets.make_set(x);
  for (const Permutation& g : t.gens) {
    for (std::size_t x = 0; x < n; ++x) sets.union_set(x, static_cast<std::size_t>(g(static_cast<int>(x))));
  }
  for (std::size_t x = 1; x < n; ++x) {
    if (sets.find_set(x) != sets.find_set(std::size_t{0})) return false;
  }
  return true;
}

HomTuple make_hom_tuple(int genus, std::vector<Permutation> gens, std::uint64_t seed) {
  if (static_cast<int>(gens.size()) != 2 * genus) throw std::invalid_argument("hom tuple needs 2g permutations");
  HomTuple t;
  t.genus = genus;
  t.n = gens.front().size();
  for (const auto& g : gens) {
    if (g.size() != t.n) throw std::invalid_argument("hom tuple: permutations of different sizes");
  }
  t.gens = std::move(gens);
  t.relation_ok = relation_holds(t.gens);
  t.transitive = transitivity(t);
  t.seed = seed;
  return t;
}

Permutation evaluate(const HomTuple& t, const Word& w) {
  Permutation p = Permutation::identity(t.n);
  for (Letter l : w.letters()) {
    const int k = std::abs(l);
    if (k > 2 * t.genus) throw std::invalid_argument("letter outside the tuple's generators");
    const Permutation& g = t.gens[static_cast<std::size_t>(k - 1)];
    p = p * (l > 0 ? g : g.inverse());
  }
  return p;
}

nlohmann::json to_json(const HomTuple& t) {
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& g : t.gens) gens.push_back(g.one_line());
  return {{"n", t.n},
          {"genus", t.genus},
          {"gens", gens},
          {"relation_ok", t.relation_ok},
          {"transitive", t.transitive},
          {"seed", t.seed}};
}

HomTuple hom_tuple_from_json(const nlohmann::json& j) {
  std::vector<Permutation> gens;
  for (const auto& g : j.at("gens")) gens.push_back(Permutation::from_one_line(g.get<std::vector<int>>()));
  HomTuple t = make_hom_tuple(j.at("genus").get<int>(), std::move(gens), j.value("seed", std::uint64_t{0}));
  if (t.n != j.at("n").get<int>()) throw std::invalid_argument("hom tuple json: n does not match the permutations");
  return t;
}

BigInt uniform_below(const BigInt& bound, Rng& rng) {
  if (bound <= 0) throw std::invalid_argument("uniform_below: bound must be positive");
  return boost::random::uniform_int_distribution<BigInt>(0, bound - 1)(rng);
}

std::size_t weighted_choice(std::span<const BigInt> weights, Rng& rng) {
  BigInt total = 0;
  for (const auto& w : weights) {
    if (w < 0) throw std::invalid_argument("weighted_choice: negative weight");
    total += w;
  }
  BigInt x = uniform_below(total, rng);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (x < weights[i]) return i;
    x -= weights[i];
  }
  throw std::logic_error("weighted_choice: fell through");
}

Permutation conjugator(const Permutation& x, const Permutation& y) {
  const auto cx = x.cycles();
  const auto cy = y.cycles();
  if (x.size() != y.size() || cx.size() != cy.size()) throw std::invalid_argument("conjugator: cycle types differ");
  std::vector<int> b(static_cast<std::size_t>(x.size()));
  for (std::size_t j = 0; j < cx.size(); ++j) {
    if (cx[j].size() != cy[j].size()) throw std::invalid_argument("conjugator: cycle types differ");
    for (std::size_t i = 0; i < cx[j].size(); ++i) b[static_cast<std::size_t>(cx[j][i])] = cy[j][i];
  }
  return Permutation(std::move(b));
}

Permutation random_centralizer_element(const Permutation& x, Rng& rng) {
  const auto cyc = x.cycles();
  std::vector<int> z(static_cast<std::size_t>(x.size()));
  std::size_t begin = 0;
  while (begin < cyc.size()) {
    std::size_t end = begin;
    while (end < cyc.size() && cyc[end].size() == cyc[begin].size()) ++end;
    const auto len = static_cast<int>(cyc[begin].size());
    // wreath product C_len wr S_m: shuffle the equal-length cycles, rotate each
    const Permutation shuffle = Permutation::random(static_cast<int>(end - begin), rng);
    for (std::size_t j = begin; j < end; ++j) {
      const auto& to = cyc[begin + static_cast<std::size_t>(shuffle(static_cast<int>(j - begin)))];
      const int shift = uniform_int(0, len - 1, rng);
      for (int i = 0; i < len; ++i) {
        z[static_cast<std::size_t>(cyc[j][static_cast<std::size_t>(i)])] = to[static_cast<std::size_t>((i + shift) % len)];
      }
    }
    begin = end;
  }
  return Permutation(std::move(z));
}

HomSampler::HomSampler(int n, int genus, SamplerOptions opts)
    : n_(n), genus_(genus), opts_(opts), table_(shared_table(n, opts.cap)) {
  if (genus < 1) throw std::invalid_argument("sampler: genus must be at least 1");
  const CharacterTable& t = *table_;
  const std::size_t c = t.class_count();
  for (std::size_t k = 0; k < c; ++k) {
    class_lookup_.emplace(t.partitions[k], k);
    std::vector<int> img(static_cast<std::size_t>(n));
    int pos = 0;
    for (int len : t.partitions[k]) {
      for (int i = 0; i < len; ++i) img[static_cast<std::size_t>(pos + i)] = pos + (i + 1) % len;
      pos += len;
    }
    representatives_.emplace_back(std::move(img));
  }
  for (std::size_t l = 0; l < c; ++l) codims_.push_back(t.group_order / t.dimension(l));

  n_commutators_.assign(static_cast<std::size_t>(genus) + 1, std::vector<BigInt>(c, 0));
  n_commutators_[0][t.identity_class()] = 1;
  for (int j = 1; j <= genus; ++j) {
    for (std::size_t k = 0; k < c; ++k) {
      BigInt s = 0;
      for (std::size_t l = 0; l < c; ++l) {
        s += t.chi[l][k] * boost::multiprecision::pow(codims_[l], static_cast<unsigned>(2 * j - 1));
      }
      if (s < 0) throw std::logic_error("sampler: negative commutator count");
      n_commutators_[static_cast<std::size_t>(j)][k] = s;
    }
  }
  hom_count_ = n_commutators_[static_cast<std::size_t>(genus)][t.identity_class()];

  // pairs (A, B) with [A, B] = c and A in class K: #{u in K : u^-1 c in K} |Z(u)|
  commutator_weights_.assign(c, std::vector<BigInt>(c, 0));
  for (std::size_t q = 0; q < c; ++q) {
    for (std::size_t k = 0; k < c; ++k) {
      commutator_weights_[q][k] = factorization_count(k, k, q) * (t.group_order / t.class_sizes[k]);
    }
  }
  if (genus >= 2) identity_step_weights_ = step_weights(t.identity_class());
}

std::vector<std::vector<BigInt>> HomSampler::step_weights(std::size_t q) const {
  const std::size_t c = table_->class_count();
  std::vector<std::vector<BigInt>> w(c, std::vector<BigInt>(c, 0));
  for (std::size_t r = 0; r < c; ++r) {
    for (std::size_t s = 0; s < c; ++s) w[r][s] = factorization_count(r, s, q) * n_commutators_[1][s];
  }
  return w;
}

BigInt HomSampler::factorization_count(std::size_t r, std::size_t s, std::size_t q) const {
  const CharacterTable& t = *table_;
  Int128 sum = 0;
  for (std::size_t l = 0; l < t.class_count(); ++l) {
    // |chi chi chi| n!/d <= d^2 n! fits comfortably
    const Int128 triple = static_cast<Int128>(t.chi[l][r]) * t.chi[l][s] * t.chi[l][q];
    sum += triple * static_cast<Int128>(static_cast<std::uint64_t>(codims_[l]));
  }
  BigInt num = to_big(sum) * t.class_sizes[r] * t.class_sizes[s];
  const BigInt den = t.group_order * t.group_order;
  if (num % den != 0) throw std::logic_error("sampler: non-integral factorization count");
  return num / den;
}

std::size_t HomSampler::class_of(const Permutation& p) const { return class_lookup_.at(p.cycle_type()); }

Permutation HomSampler::random_in_class(std::size_t cls, Rng& rng) const {
  const Permutation sigma = Permutation::random(n_, rng);
  return sigma * representatives_[cls] * sigma.inverse();
}

std::pair<Permutation, Permutation> HomSampler::factor(const Permutation& q, std::size_t r_cls, std::size_t s_cls,
                                                       Rng& rng) const {
  const Partition& s_type = table_->partitions[s_cls];
  for (std::int64_t attempt = 0; attempt < opts_.retry_cap; ++attempt) {
    Permutation r = random_in_class(r_cls, rng);
    Permutation s = r.inverse() * q;
    if (s.cycle_type() == s_type) return {std::move(r), std::move(s)};
  }
  if (n_ > opts_.exhaustive_max_n) {
    throw SamplingFailure("in-class rejection exceeded the retry cap at n = " + std::to_string(n_));
  }
  std::vector<Permutation> hits;
  const Partition& r_type = table_->partitions[r_cls];
  std::vector<int> img(static_cast<std::size_t>(n_));
  std::iota(img.begin(), img.end(), 0);
  do {
    Permutation r(img);
    if (r.cycle_type() == r_type && (r.inverse() * q).cycle_type() == s_type) hits.push_back(std::move(r));
  } while (std::next_permutation(img.begin(), img.end()));
  if (hits.empty()) throw std::logic_error("sampler: class pair admits no factorization");
  Permutation r = hits[static_cast<std::size_t>(uniform_int(0, static_cast<int>(hits.size()) - 1, rng))];
  Permutation s = r.inverse() * q;
  return {std::move(r), std::move(s)};
}

std::pair<Permutation, Permutation> HomSampler::sample_commutator_pair(const Permutation& c, Rng& rng) const {
  const std::size_t k = weighted_choice(commutator_weights_[class_of(c)], rng);
  auto [u, v] = factor(c, k, k, rng);
  const Permutation u_inv = u.inverse();
  Permutation b = conjugator(u_inv, v) * random_centralizer_element(u_inv, rng);
  return {std::move(u), std::move(b)};
}

HomTuple HomSampler::sample(Rng& rng) const {
  const CharacterTable& t = *table_;
  const std::size_t c = t.class_count();
  std::vector<Permutation> gens(static_cast<std::size_t>(2 * genus_));
  Permutation q = Permutation::identity(n_);
  for (int k = genus_; k >= 2; --k) {
    const std::size_t qc = class_of(q);
    const std::vector<std::vector<BigInt>> fresh = qc == t.identity_class() ? std::vector<std::vector<BigInt>>{} : step_weights(qc);
    const auto& pair_w = qc == t.identity_class() ? identity_step_weights_ : fresh;
    // class R of P_{k-1}: N_{k-1}(R) sum_S N_{R,S}(Q) M(S)
    std::vector<BigInt> r_w(c, 0);
    for (std::size_t r = 0; r < c; ++r) {
      for (const BigInt& w : pair_w[r]) r_w[r] += w;
      r_w[r] *= n_commutators_[static_cast<std::size_t>(k - 1)][r];
    }
    const std::size_t r = weighted_choice(r_w, rng);
    const std::size_t s = weighted_choice(pair_w[r], rng);
    auto [pr, ps] = factor(q, r, s, rng);
    auto [a, b] = sample_commutator_pair(ps, rng);
    gens[static_cast<std::size_t>(2 * k - 2)] = std::move(a);
    gens[static_cast<std::size_t>(2 * k - 1)] = std::move(b);
    q = std::move(pr);
  }
  auto [a, b] = sample_commutator_pair(q, rng);
  gens[0] = std::move(a);
  gens[1] = std::move(b);
  HomTuple out = make_hom_tuple(genus_, std::move(gens));
  if (!out.relation_ok) throw std::logic_error("sampler produced a tuple violating the relation");
  return out;
}

HomTuple HomSampler::sample(std::uint64_t seed) const {
  Rng rng(seed);
  HomTuple t = sample(rng);
  t.seed = seed;
  return t;
}

HomTuple sample_by_rejection(int n, int genus, Rng& rng) {
  if (n < 1 || n > 5) throw std::invalid_argument("rejection sampling is limited to n <= 5");
  if (genus < 1) throw std::invalid_argument("genus must be at least 1");
  for (;;) {
    std::vector<Permutation> gens;
    for (int i = 0; i < 2 * genus; ++i) gens.push_back(Permutation::random(n, rng));
    if (relation_holds(gens)) return make_hom_tuple(genus, std::move(gens));
  }
}

std::vector<double> helmert_coordinates(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> y(n == 0 ? 0 : n - 1);
  double prefix = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    prefix += x[k - 1];
    const auto kd = static_cast<double>(k);
    y[k - 1] = (prefix - kd * x[k]) / std::sqrt(kd * (kd + 1.0));
  }
  return y;
}

std::vector<double> from_helmert(std::span<const double> y) {
  const std::size_t n = y.size() + 1;
  std::vector<double> x(n, 0.0);
  double suffix = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    if (j >= 1) {
      const auto jd = static_cast<double>(j);
      x[j] = suffix - jd * y[j - 1] / std::sqrt(jd * (jd + 1.0));
      suffix += y[j - 1] / std::sqrt(jd * (jd + 1.0));
    } else {
      x[0] = suffix;
    }
  }
  return x;
}

std::vector<double> StdAction::apply(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != pi_.size()) throw std::invalid_argument("std action: dimension mismatch");
  std::vector<double> y(x.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    // y[pi(i)] = x[i]
    y[static_cast<std::size_t>(pi_(static_cast<int>(i)))] = x[i];
    mean += x[i];
  }
  mean /= static_cast<double>(x.size());
  for (double& v : y) v -= mean;
  return y;
}

std::vector<double> StdAction::apply_helmert(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != dimension()) throw std::invalid_argument("std action: dimension mismatch");
  const std::vector<double> x = from_helmert(y);
  std::vector<double> moved(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) moved[static_cast<std::size_t>(pi_(static_cast<int>(i)))] = x[i];
  return helmert_coordinates(moved);
}

StdAction std_action(const HomTuple& t, const Word& gamma) { return StdAction(evaluate(t, gamma)); }

}  // namespace covergap
