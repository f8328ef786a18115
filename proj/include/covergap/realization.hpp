#pragma once

// Fuchsian realization of the surface group and enumeration of group
// elements by displacement of the base point.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "covergap/hyperbolic.hpp"
#include "covergap/surface_group.hpp"

namespace covergap {

/// A side pairing of the fundamental polygon, written in the standard
/// generators.
struct SidePairing {
  Word word;
  Isometry matrix;
};

struct FuchsianRealization {
  SurfacePresentation presentation{2};
  /// Images of a_1, b_1, ..., a_g, b_g.
  std::vector<Isometry> generator_matrices;
  /// Side pairings in polygon order; pairing k maps F onto the tile across
  /// side k. Closed under inverses.
  std::vector<SidePairing> side_pairings;
  HPoint base_point;
  /// Polygon vertices in counterclockwise order.
  std::vector<HPoint> domain_vertices;
  /// Max pairwise vertex distance.
  double domain_diameter = 0.0;
  /// Max distance from base_point to the polygon.
  double domain_radius = 0.0;
};

/// Product of generator matrices, left to right.
Isometry evaluate(const Word& w, const FuchsianRealization& real);

/// Genus-2 surface from the regular octagon with angles pi/4.
FuchsianRealization build_bolza_realization();

/// Hyperbolic area of the convex polygon with the given vertices.
double polygon_area(std::span<const HPoint> vertices);
/// True iff z lies in the closed convex polygon (counterclockwise vertices).
bool polygon_contains(std::span<const HPoint> vertices, HPoint z, double tol = 1e-12);

struct GroupElement {
  Word word;
  Isometry matrix;
  /// d(base_point, matrix * base_point)
  double displacement = 0.0;
};

struct SupportSet {
  std::vector<GroupElement> elements;
  /// inverse_of[i] is the index of elements[i]^-1.
  std::vector<std::size_t> inverse_of;
  double radius_used = 0.0;

  std::size_t size() const noexcept { return elements.size(); }
  /// Index of the identity (always present).
  std::size_t identity_index() const;
};

struct LatticeOptions {
  double radius_cap = 12.0;
};

/// All gamma with d(base, gamma base) <= R, by breadth-first search over side
/// pairings. Tiles met by the geodesic from base to gamma base stay within
/// R + domain_radius of base, so pruning beyond that radius loses nothing.
SupportSet lattice_points(const FuchsianRealization& real, double R, LatticeOptions opts = {});

/// Points of the closed polygon used by support_set when no grid is given:
/// the base point and every boundary side sampled at per_side points.
std::vector<HPoint> boundary_samples(const FuchsianRealization& real, int per_side);

/// {gamma : min over sample pairs (z, w) of d(z, gamma w) <= t + slack}.
/// Candidates come from lattice_points(2 domain_radius + t + slack). The
/// result is closed under inverses.
SupportSet support_set(const FuchsianRealization& real, KernelRadius t,
                       std::span<const HPoint> samples, double slack = 0.0,
                       LatticeOptions opts = {});
/// Boundary-sampled support set with slack equal to the sample spacing, a
/// superset of the support for any node set inside the polygon.
SupportSet support_set(const FuchsianRealization& real, KernelRadius t, LatticeOptions opts = {});

/// Max Dehn-reduced word length over the set.
std::size_t max_word_length(const SupportSet& s, const SurfacePresentation& p);

nlohmann::json to_json(const SupportSet& s, const SurfacePresentation& p);

/// Tiles reachable from F by crossing at most `depth` sides, i.e. the ball of
/// that radius in the word metric of the side pairings. Ordered by depth.
struct TileBall {
  std::vector<GroupElement> elements;
  std::vector<int> depth;
};

TileBall tile_ball(const FuchsianRealization& real, int depth);

/// Finds elements of a fixed set by the orbit point of the base point.
class ElementLookup {
 public:
  ElementLookup(const FuchsianRealization& real, std::span<const GroupElement> elements);
  ~ElementLookup();
  ElementLookup(ElementLookup&&) noexcept;
  ElementLookup& operator=(ElementLookup&&) noexcept;

  std::optional<std::size_t> find(const Isometry& g) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace covergap
