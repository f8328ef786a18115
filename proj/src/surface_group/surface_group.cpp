#include "covergap/surface_group.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace covergap {

namespace {

void append_reduced(std::vector<Letter>& out, Letter l) {
  if (!out.empty() && out.back() == -l) {
    out.pop_back();
  } else {
    out.push_back(l);
  }
}

std::vector<Letter> free_reduce(std::span<const Letter> in) {
  std::vector<Letter> out;
  out.reserve(in.size());
  for (Letter l : in) {
    if (l == 0) throw std::invalid_argument("word letters must be nonzero");
    append_reduced(out, l);
  }
  return out;
}

// Longest match of a relator cycle starting at position i of w.
struct Match {
  std::size_t length = 0;
  std::size_t cycle = 0;
};

Match longest_match(const std::vector<Letter>& w, std::size_t i,
                    const std::vector<std::vector<Letter>>& cycles) {
  Match best;
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const auto& r = cycles[c];
    if (r.front() != w[i]) continue;
    std::size_t k = 1;
    while (k < r.size() && i + k < w.size() && r[k] == w[i + k]) ++k;
    if (k > best.length) best = {k, c};
  }
  return best;
}

}  // namespace

Word::Word(std::initializer_list<Letter> letters)
    : letters_(free_reduce(std::span<const Letter>(letters.begin(), letters.size()))) {}

Word::Word(std::vector<Letter> letters) : letters_(free_reduce(letters)) {}

Word Word::inverse() const {
  std::vector<Letter> out(letters_.rbegin(), letters_.rend());
  for (Letter& l : out) l = -l;
  Word w;
  w.letters_ = std::move(out);
  return w;
}

Word Word::operator*(const Word& rhs) const {
  Word w;
  w.letters_ = letters_;
  w.letters_.reserve(letters_.size() + rhs.letters_.size());
  for (Letter l : rhs.letters_) append_reduced(w.letters_, l);
  return w;
}

SurfacePresentation::SurfacePresentation(int genus) : genus_(genus) {
  if (genus < 2) throw std::invalid_argument("surface genus must be at least 2");
  std::vector<Letter> rel;
  for (int i = 0; i < genus; ++i) {
    const Letter a = 2 * i + 1;
    const Letter b = 2 * i + 2;
    rel.insert(rel.end(), {a, b, -a, -b});
  }
  relator_ = Word(rel);
  const std::vector<Letter> inv = relator_.inverse().letters();
  for (const std::vector<Letter>* base : std::array<const std::vector<Letter>*, 2>{&rel, &inv}) {
    for (std::size_t k = 0; k < base->size(); ++k) {
      std::vector<Letter> rot(base->begin() + static_cast<std::ptrdiff_t>(k), base->end());
      rot.insert(rot.end(), base->begin(), base->begin() + static_cast<std::ptrdiff_t>(k));
      cycles_.push_back(std::move(rot));
    }
  }
}

std::string SurfacePresentation::letter_name(Letter l) const {
  if (!is_letter(l)) throw std::invalid_argument("letter out of range for this genus");
  const int k = std::abs(l);
  std::string name = (k % 2 == 1 ? "a" : "b") + std::to_string((k + 1) / 2);
  if (l < 0) name += "^-1";
  return name;
}

std::string SurfacePresentation::to_string(const Word& w) const {
  if (w.empty()) return "e";
  std::string s;
  for (Letter l : w.letters()) {
    if (!s.empty()) s += ' ';
    s += letter_name(l);
  }
  return s;
}

Word dehn_reduce(const Word& w, const SurfacePresentation& p) {
  const auto& cycles = p.relator_cycles();
  const std::size_t half = static_cast<std::size_t>(2 * p.genus());
  std::vector<Letter> cur = w.letters();
  for (Letter l : cur) {
    if (!p.is_letter(l)) throw std::invalid_argument("word uses a letter outside the presentation");
  }
  std::size_t i = 0;
  while (i < cur.size()) {
    const Match m = longest_match(cur, i, cycles);
    if (m.length <= half) {
      ++i;
      continue;
    }
    // cycle = u v with u = cur[i, i + len); u == v^-1 in the group.
    const auto& r = cycles[m.cycle];
    std::vector<Letter> next(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(i));
    // free cancellation may reach back into the untouched prefix; new
    // matches can start at most one relator length before the lowest point
    std::size_t low = next.size();
    auto push = [&](Letter l) {
      append_reduced(next, l);
      low = std::min(low, next.size());
    };
    for (std::size_t k = r.size(); k-- > m.length;) push(-r[k]);
    for (std::size_t k = i + m.length; k < cur.size(); ++k) push(cur[k]);
    cur = std::move(next);
    i = low > r.size() ? low - r.size() : 0;
  }
  return Word(std::move(cur));
}

bool same_element(const Word& u, const Word& v, const SurfacePresentation& p) {
  return dehn_reduce(u * v.inverse(), p).empty();
}

bool is_dehn_reduced(const Word& w, const SurfacePresentation& p) {
  const auto& letters = w.letters();
  const std::size_t half = static_cast<std::size_t>(2 * p.genus());
  for (std::size_t i = 0; i < letters.size(); ++i) {
    if (longest_match(letters, i, p.relator_cycles()).length > half) return false;
  }
  return true;
}

}  // namespace covergap
