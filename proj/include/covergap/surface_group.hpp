#pragma once

// Combinatorial surface group: words over a_1, b_1, ..., a_g, b_g and the
// word problem via Dehn's algorithm.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace covergap {

/// Generator k in 1..2g is a_{(k+1)/2} for odd k and b_{k/2} for even k;
/// -k is its inverse.
using Letter = int;

/// A freely reduced word. Every constructor and product reduces freely.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Letter> letters);
  explicit Word(std::vector<Letter> letters);

  const std::vector<Letter>& letters() const noexcept { return letters_; }
  std::size_t size() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }

  Word inverse() const;
  Word operator*(const Word& rhs) const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<Letter> letters_;
};

class SurfacePresentation {
 public:
  explicit SurfacePresentation(int genus);

  int genus() const noexcept { return genus_; }
  int generator_count() const noexcept { return 2 * genus_; }
  /// a_1 b_1 a_1^-1 b_1^-1 ... a_g b_g a_g^-1 b_g^-1
  const Word& relator() const noexcept { return relator_; }
  /// All cyclic rotations of the relator and of its inverse.
  const std::vector<std::vector<Letter>>& relator_cycles() const noexcept { return cycles_; }

  bool is_letter(Letter l) const noexcept { return l != 0 && l >= -2 * genus_ && l <= 2 * genus_; }
  std::string letter_name(Letter l) const;
  std::string to_string(const Word& w) const;

 private:
  int genus_;
  Word relator_;
  std::vector<std::vector<Letter>> cycles_;
};

/// Dehn's algorithm: repeatedly replaces a subword that is more than half of
/// a cyclic relator by the shorter complement. The result is empty iff w is
/// the identity of the surface group (genus >= 2).
Word dehn_reduce(const Word& w, const SurfacePresentation& p);

/// True iff the two words represent the same group element.
bool same_element(const Word& u, const Word& v, const SurfacePresentation& p);

/// True iff no Dehn replacement applies.
bool is_dehn_reduced(const Word& w, const SurfacePresentation& p);

}  // namespace covergap
