#pragma once

// Delaunay triangulation of integer lattice points and interpolants built on it.
// Predicates run in exact integer arithmetic, so lattice-snapped samples with
// collinear or cocircular subsets triangulate deterministically.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace sumlab::transport {

struct LatticePoint {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

class Triangulation {
 public:
  using Triangle = std::array<int, 3>;  // counter-clockwise vertex indices

  /// Points must be distinct; throws DomainError otherwise.
  explicit Triangulation(std::span<const LatticePoint> points);

  /// False when fewer than three distinct points exist or all are collinear.
  bool valid() const noexcept { return !triangles_.empty(); }
  const std::vector<LatticePoint>& points() const noexcept { return points_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  /// Neighbour across the edge opposite vertex k, or -1 on the hull.
  int neighbor(int tri, int k) const;
  /// Triangle containing the point (boundary counts as inside), if any.
  std::optional<int> locate(double x, double y) const;
  /// Barycentric coordinates of (x, y) with respect to a triangle.
  std::array<double, 3> barycentric(int tri, double x, double y) const;
  /// True when every interior edge satisfies the empty-circumcircle test.
  bool is_delaunay() const;
  /// Vertex indices adjacent to `v`.
  std::vector<int> vertex_neighbors(int v) const;

 private:
  void sweep();
  void legalize();
  void add_triangle(int a, int b, int c);
  int find_edge(int a, int b) const;
  void build_lattice_index();

  std::vector<LatticePoint> points_;
  std::vector<Triangle> triangles_;
  std::unordered_map<std::uint64_t, int> edges_;
  std::unordered_map<std::uint64_t, int> lattice_index_;
};

enum class InterpolationScheme { Linear, CloughTocher };

/// Scattered-data interpolant over a Delaunay triangulation of the samples.
/// Exact at the samples, continuous, reproduces affine fields inside the hull;
/// outside the hull the nearest sample's value is returned.
class FieldInterpolator {
 public:
  FieldInterpolator(std::span<const LatticePoint> points, std::span<const double> values,
                    InterpolationScheme scheme = InterpolationScheme::CloughTocher);

  double operator()(double x, double y) const;
  bool inside_hull(double x, double y) const;
  /// Too few or collinear samples: every query answers with the nearest sample.
  bool degraded() const noexcept { return degraded_; }
  const Triangulation& triangulation() const noexcept { return tri_; }
  /// Estimated gradient at a triangulation vertex (Clough-Tocher only).
  std::array<double, 2> vertex_gradient(int v) const { return gradients_.at(v); }

 private:
  struct Samples {
    std::vector<LatticePoint> points;
    std::vector<double> values;
  };
  static Samples dedupe(std::span<const LatticePoint> points, std::span<const double> values);
  FieldInterpolator(Samples samples, InterpolationScheme scheme);

  double nearest(double x, double y) const;
  double clough_tocher(int tri, const std::array<double, 3>& b) const;
  void estimate_gradients();

  Triangulation tri_;
  std::vector<double> values_;  // aligned with tri_.points()
  std::vector<std::array<double, 2>> gradients_;
  InterpolationScheme scheme_;
  bool degraded_ = false;
};

}  // namespace sumlab::transport
