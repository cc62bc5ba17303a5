#include "sumlab/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "sumlab/errors.hpp"

namespace sumlab::transport {

namespace {

using i128 = __int128;

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

std::uint64_t lattice_key(std::int64_t x, std::int64_t y) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
         static_cast<std::uint32_t>(y);
}

// Twice the signed area of (a, b, c); positive for counter-clockwise.
i128 orient(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c) {
  return static_cast<i128>(b.ix - a.ix) * (c.iy - a.iy) -
         static_cast<i128>(b.iy - a.iy) * (c.ix - a.ix);
}

double orient(double ax, double ay, double bx, double by, double cx, double cy) {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

// Positive when d lies strictly inside the circumcircle of CCW triangle (a, b, c).
i128 incircle(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c,
              const LatticePoint& d) {
  const i128 adx = a.ix - d.ix, ady = a.iy - d.iy;
  const i128 bdx = b.ix - d.ix, bdy = b.iy - d.iy;
  const i128 cdx = c.ix - d.ix, cdy = c.iy - d.iy;
  const i128 ad = adx * adx + ady * ady;
  const i128 bd = bdx * bdx + bdy * bdy;
  const i128 cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

}  // namespace

Triangulation::Triangulation(std::span<const LatticePoint> points)
    : points_(points.begin(), points.end()) {
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (const auto& p : points_) {
    constexpr std::int64_t kLimit = std::int64_t{1} << 30;
    if (std::abs(p.ix) >= kLimit || std::abs(p.iy) >= kLimit)
      throw DomainError("lattice coordinate out of range for exact predicates");
    if (!seen.insert({p.ix, p.iy}).second) throw DomainError("duplicate triangulation vertex");
  }
  sweep();
  if (!triangles_.empty()) {
    legalize();
    build_lattice_index();
  }
}

void Triangulation::add_triangle(int a, int b, int c) {
  const int id = static_cast<int>(triangles_.size());
  triangles_.push_back({a, b, c});
  edges_[edge_key(a, b)] = id;
  edges_[edge_key(b, c)] = id;
  edges_[edge_key(c, a)] = id;
}

int Triangulation::find_edge(int a, int b) const {
  auto it = edges_.find(edge_key(a, b));
  return it == edges_.end() ? -1 : it->second;
}

void Triangulation::sweep() {
  const int n = static_cast<int>(points_.size());
  if (n < 3) return;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const auto& a = points_[i];
    const auto& b = points_[j];
    return a.ix != b.ix ? a.ix < b.ix : a.iy < b.iy;
  });

  // Leading collinear run, then the first point off that line.
  int k = 2;
  while (k < n && orient(points_[order[0]], points_[order[1]], points_[order[k]]) == 0) ++k;
  if (k == n) return;

  const int apex = order[k];
  const bool left = orient(points_[order[0]], points_[order[1]], points_[apex]) > 0;
  std::vector<int> hull;
  for (int i = 0; i + 1 < k; ++i) {
    const int a = order[i];
    const int b = order[i + 1];
    if (left) add_triangle(a, b, apex); else add_triangle(b, a, apex);
  }
  if (left) {
    for (int i = 0; i < k; ++i) hull.push_back(order[i]);
    hull.push_back(apex);
  } else {
    hull.push_back(order[0]);
    hull.push_back(apex);
    for (int i = k - 1; i >= 1; --i) hull.push_back(order[i]);
  }

  for (int idx = k + 1; idx < n; ++idx) {
    const int p = order[idx];
    const int h = static_cast<int>(hull.size());
    std::vector<char> visible(h);
    for (int i = 0; i < h; ++i)
      visible[i] = orient(points_[hull[i]], points_[hull[(i + 1) % h]], points_[p]) < 0;
    // The visible edges form one circular run; find where it starts.
    int start = -1;
    for (int i = 0; i < h; ++i) {
      if (visible[i] && !visible[(i - 1 + h) % h]) {
        start = i;
        break;
      }
    }
    if (start < 0) throw NumericError("triangulation sweep found no visible hull edge");
    int count = 0;
    while (visible[(start + count) % h]) {
      const int a = hull[(start + count) % h];
      const int b = hull[(start + count + 1) % h];
      add_triangle(b, a, p);
      ++count;
    }
    // Replace the vertices strictly inside the visible chain with p.
    std::vector<int> next;
    next.reserve(h + 1);
    const int first = start;
    const int last = (start + count) % h;
    for (int i = 0; i < h; ++i) {
      const int pos = (last + i) % h;  // walk from the end of the chain around to its start
      next.push_back(hull[pos]);
      if (pos == first) break;
    }
    next.push_back(p);
    hull = std::move(next);
  }
}

void Triangulation::legalize() {
  std::vector<std::pair<int, int>> stack;
  for (const auto& t : triangles_)
    for (int i = 0; i < 3; ++i) stack.emplace_back(t[i], t[(i + 1) % 3]);

  std::size_t guard = 0;
  const std::size_t guard_limit = 64 * (stack.size() + 16) * (stack.size() + 16);
  while (!stack.empty()) {
    if (++guard > guard_limit) throw NumericError("Delaunay edge flipping did not terminate");
    auto [a, b] = stack.back();
    stack.pop_back();
    const int t1 = find_edge(a, b);
    const int t2 = find_edge(b, a);
    if (t1 < 0 || t2 < 0) continue;
    auto third = [&](int t, int u, int v) {
      for (int x : triangles_[t])
        if (x != u && x != v) return x;
      return -1;
    };
    const int c = third(t1, a, b);
    const int d = third(t2, a, b);
    if (incircle(points_[a], points_[b], points_[c], points_[d]) <= 0) continue;

    // T1 = (a,b,c), T2 = (b,a,d)  ->  (a,d,c), (b,c,d)
    edges_.erase(edge_key(a, b));
    edges_.erase(edge_key(b, a));
    triangles_[t1] = {a, d, c};
    triangles_[t2] = {b, c, d};
    edges_[edge_key(a, d)] = t1;
    edges_[edge_key(d, c)] = t1;
    edges_[edge_key(c, a)] = t1;
    edges_[edge_key(b, c)] = t2;
    edges_[edge_key(c, d)] = t2;
    edges_[edge_key(d, b)] = t2;
    stack.emplace_back(a, d);
    stack.emplace_back(d, b);
    stack.emplace_back(b, c);
    stack.emplace_back(c, a);
  }
}

void Triangulation::build_lattice_index() {
  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
    const auto& tri = triangles_[t];
    std::int64_t x0 = points_[tri[0]].ix, x1 = x0, y0 = points_[tri[0]].iy, y1 = y0;
    for (int v : tri) {
      x0 = std::min(x0, points_[v].ix);
      x1 = std::max(x1, points_[v].ix);
      y0 = std::min(y0, points_[v].iy);
      y1 = std::max(y1, points_[v].iy);
    }
    for (std::int64_t x = x0; x <= x1; ++x) {
      for (std::int64_t y = y0; y <= y1; ++y) {
        const LatticePoint q{x, y};
        if (orient(points_[tri[0]], points_[tri[1]], q) >= 0 &&
            orient(points_[tri[1]], points_[tri[2]], q) >= 0 &&
            orient(points_[tri[2]], points_[tri[0]], q) >= 0)
          lattice_index_.emplace(lattice_key(x, y), t);
      }
    }
  }
}

int Triangulation::neighbor(int tri, int k) const {
  const auto& t = triangles_.at(tri);
  return find_edge(t[(k + 2) % 3], t[(k + 1) % 3]);
}

std::optional<int> Triangulation::locate(double x, double y) const {
  if (triangles_.empty()) return std::nullopt;
  if (x == std::floor(x) && y == std::floor(y) && std::abs(x) < 1e9 && std::abs(y) < 1e9) {
    auto it = lattice_index_.find(
        lattice_key(static_cast<std::int64_t>(x), static_cast<std::int64_t>(y)));
    if (it == lattice_index_.end()) return std::nullopt;
    return it->second;
  }
  constexpr double kEps = 1e-12;
  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
    const auto b = barycentric(t, x, y);
    if (b[0] >= -kEps && b[1] >= -kEps && b[2] >= -kEps) return t;
  }
  return std::nullopt;
}

std::array<double, 3> Triangulation::barycentric(int tri, double x, double y) const {
  const auto& t = triangles_.at(tri);
  const auto& p0 = points_[t[0]];
  const auto& p1 = points_[t[1]];
  const auto& p2 = points_[t[2]];
  const double x0 = static_cast<double>(p0.ix), y0 = static_cast<double>(p0.iy);
  const double x1 = static_cast<double>(p1.ix), y1 = static_cast<double>(p1.iy);
  const double x2 = static_cast<double>(p2.ix), y2 = static_cast<double>(p2.iy);
  const double area = orient(x0, y0, x1, y1, x2, y2);
  const double b0 = orient(x, y, x1, y1, x2, y2) / area;
  const double b1 = orient(x0, y0, x, y, x2, y2) / area;
  return {b0, b1, 1.0 - b0 - b1};
}

bool Triangulation::is_delaunay() const {
  for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int nb = neighbor(t, k);
      if (nb < 0) continue;
      const auto& tri = triangles_[t];
      const auto& other = triangles_[nb];
      int opposite = -1;
      for (int v : other)
        if (v != tri[(k + 1) % 3] && v != tri[(k + 2) % 3]) opposite = v;
      if (incircle(points_[tri[0]], points_[tri[1]], points_[tri[2]], points_[opposite]) > 0)
        return false;
    }
  }
  return true;
}

std::vector<int> Triangulation::vertex_neighbors(int v) const {
  std::set<int> out;
  for (const auto& t : triangles_) {
    if (t[0] != v && t[1] != v && t[2] != v) continue;
    for (int x : t)
      if (x != v) out.insert(x);
  }
  return {out.begin(), out.end()};
}

// ---------------------------------------------------------------------------

FieldInterpolator::Samples FieldInterpolator::dedupe(std::span<const LatticePoint> points,
                                                     std::span<const double> values) {
  if (points.size() != values.size())
    throw DomainError("interpolation needs one value per sample point");
  Samples out;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(values[i])) throw DomainError("interpolation sample value is not finite");
    if (seen.insert({points[i].ix, points[i].iy}).second) {
      out.points.push_back(points[i]);
      out.values.push_back(values[i]);
    }
  }
  if (out.points.empty()) throw DomainError("interpolation needs at least one sample");
  return out;
}

FieldInterpolator::FieldInterpolator(std::span<const LatticePoint> points,
                                     std::span<const double> values, InterpolationScheme scheme)
    : FieldInterpolator(dedupe(points, values), scheme) {}

FieldInterpolator::FieldInterpolator(Samples d, InterpolationScheme scheme)
    : tri_(d.points), values_(std::move(d.values)), scheme_(scheme) {
  degraded_ = !tri_.valid();
  if (!degraded_ && scheme_ == InterpolationScheme::CloughTocher) estimate_gradients();
}

double FieldInterpolator::nearest(double x, double y) const {
  const auto& pts = tri_.points();
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = static_cast<double>(pts[i].ix) - x;
    const double dy = static_cast<double>(pts[i].iy) - y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best) {
      best = d2;
      arg = i;
    }
  }
  return values_[arg];
}

bool FieldInterpolator::inside_hull(double x, double y) const {
  return !degraded_ && tri_.locate(x, y).has_value();
}

double FieldInterpolator::operator()(double x, double y) const {
  if (degraded_) return nearest(x, y);
  const auto tri = tri_.locate(x, y);
  if (!tri) return nearest(x, y);
  const auto b = tri_.barycentric(*tri, x, y);
  if (scheme_ == InterpolationScheme::Linear) {
    const auto& t = tri_.triangles()[*tri];
    return b[0] * values_[t[0]] + b[1] * values_[t[1]] + b[2] * values_[t[2]];
  }
  return clough_tocher(*tri, b);
}

// Gradient at each vertex from a weighted least-squares quadratic through the
// vertex value, fitted to its one-ring (two-ring when the one-ring is small).
// Exact for affine data.
void FieldInterpolator::estimate_gradients() {
  const auto& pts = tri_.points();
  const int n = static_cast<int>(pts.size());
  std::vector<std::vector<int>> ring(n);
  for (int v = 0; v < n; ++v) ring[v] = tri_.vertex_neighbors(v);

  gradients_.assign(n, {0.0, 0.0});
  for (int v = 0; v < n; ++v) {
    std::set<int> hood(ring[v].begin(), ring[v].end());
    if (hood.size() < 6) {
      for (int w : ring[v])
        for (int u : ring[w])
          if (u != v) hood.insert(u);
    }
    const double x0 = static_cast<double>(pts[v].ix);
    const double y0 = static_cast<double>(pts[v].iy);
    double scale = 0.0;
    for (int w : hood)
      scale = std::max(scale, std::hypot(pts[w].ix - x0, pts[w].iy - y0));
    if (scale == 0.0) continue;

    const int m = static_cast<int>(hood.size());
    const bool quadratic = m >= 6;
    const int cols = quadratic ? 5 : 2;
    Eigen::MatrixXd A(m, cols);
    Eigen::VectorXd rhs(m);
    int row = 0;
    for (int w : hood) {
      const double dx = (pts[w].ix - x0) / scale;
      const double dy = (pts[w].iy - y0) / scale;
      const double wt = 1.0 / std::hypot(dx, dy);
      A(row, 0) = wt * dx;
      A(row, 1) = wt * dy;
      if (quadratic) {
        A(row, 2) = wt * 0.5 * dx * dx;
        A(row, 3) = wt * dx * dy;
        A(row, 4) = wt * 0.5 * dy * dy;
      }
      rhs(row) = wt * (values_[w] - values_[v]);
      ++row;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::VectorXd sol;
    if (qr.rank() == cols) {
      sol = qr.solve(rhs);
    } else {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> plane(A.leftCols(2));
      if (plane.rank() < 2) continue;
      sol = plane.solve(rhs);
    }
    gradients_[v] = {sol(0) / scale, sol(1) / scale};
  }
}

// Clough-Tocher C1 cubic: the triangle is split at its centroid into three
// cubic Bezier patches; cross-boundary derivatives are linear along edges.
double FieldInterpolator::clough_tocher(int tri, const std::array<double, 3>& b) const {
  const auto& t = tri_.triangles()[tri];
  const auto& pts = tri_.points();
  auto px = [&](int i) { return static_cast<double>(pts[t[i]].ix); };
  auto py = [&](int i) { return static_cast<double>(pts[t[i]].iy); };

  const double e12x = px(1) - px(0), e12y = py(1) - py(0);
  const double e23x = px(2) - px(1), e23y = py(2) - py(1);
  const double e31x = px(0) - px(2), e31y = py(0) - py(2);

  const double f1 = values_[t[0]], f2 = values_[t[1]], f3 = values_[t[2]];
  const auto& g1 = gradients_[t[0]];
  const auto& g2 = gradients_[t[1]];
  const auto& g3 = gradients_[t[2]];

  const double df12 = +(g1[0] * e12x + g1[1] * e12y);
  const double df21 = -(g2[0] * e12x + g2[1] * e12y);
  const double df23 = +(g2[0] * e23x + g2[1] * e23y);
  const double df32 = -(g3[0] * e23x + g3[1] * e23y);
  const double df31 = +(g3[0] * e31x + g3[1] * e31y);
  const double df13 = -(g1[0] * e31x + g1[1] * e31y);

  const double c3000 = f1;
  const double c2100 = f1 + df12 / 3;
  const double c2010 = f1 + df13 / 3;
  const double c0300 = f2;
  const double c0210 = f2 + df23 / 3;
  const double c1200 = f2 + df21 / 3;
  const double c0030 = f3;
  const double c1020 = f3 + df31 / 3;
  const double c0120 = f3 + df32 / 3;

  const double c2001 = (c2100 + c2010 + c3000) / 3;
  const double c0201 = (c1200 + c0300 + c0210) / 3;
  const double c0021 = (c1020 + c0120 + c0030) / 3;

  // Direction of the C1 condition across each edge: towards the neighbour's
  // centroid, expressed in this triangle's barycentric coordinates.
  double g[3];
  for (int k = 0; k < 3; ++k) {
    const int nb = tri_.neighbor(tri, k);
    if (nb < 0) {
      g[k] = -0.5;
      continue;
    }
    const auto& o = tri_.triangles()[nb];
    double cx = 0.0, cy = 0.0;
    for (int v : o) {
      cx += static_cast<double>(pts[v].ix) / 3;
      cy += static_cast<double>(pts[v].iy) / 3;
    }
    const auto c = tri_.barycentric(tri, cx, cy);
    if (k == 0) g[k] = (2 * c[2] + c[1] - 1) / (2 - 3 * c[2] - 3 * c[1]);
    else if (k == 1) g[k] = (2 * c[0] + c[2] - 1) / (2 - 3 * c[0] - 3 * c[2]);
    else g[k] = (2 * c[1] + c[0] - 1) / (2 - 3 * c[1] - 3 * c[0]);
  }

  const double c0111 = (g[0] * (-c0300 + 3 * c0210 - 3 * c0120 + c0030) +
                        (-c0300 + 2 * c0210 - c0120 + c0021 + c0201)) / 2;
  const double c1011 = (g[1] * (-c0030 + 3 * c1020 - 3 * c2010 + c3000) +
                        (-c0030 + 2 * c1020 - c2010 + c2001 + c0021)) / 2;
  const double c1101 = (g[2] * (-c3000 + 3 * c2100 - 3 * c1200 + c0300) +
                        (-c3000 + 2 * c2100 - c1200 + c2001 + c0201)) / 2;

  const double c1002 = (c1101 + c1011 + c2001) / 3;
  const double c0102 = (c1101 + c0111 + c0201) / 3;
  const double c0012 = (c1011 + c0111 + c0021) / 3;
  const double c0003 = (c1002 + c0102 + c0012) / 3;

  const double minval = std::min({b[0], b[1], b[2]});
  const double b1 = b[0] - minval;
  const double b2 = b[1] - minval;
  const double b3 = b[2] - minval;
  const double b4 = 3 * minval;

  return b1 * b1 * b1 * c3000 + 3 * b1 * b1 * b2 * c2100 + 3 * b1 * b1 * b3 * c2010 +
         3 * b1 * b1 * b4 * c2001 + 3 * b1 * b2 * b2 * c1200 + 6 * b1 * b2 * b4 * c1101 +
         3 * b1 * b3 * b3 * c1020 + 6 * b1 * b3 * b4 * c1011 + 3 * b1 * b4 * b4 * c1002 +
         b2 * b2 * b2 * c0300 + 3 * b2 * b2 * b3 * c0210 + 3 * b2 * b2 * b4 * c0201 +
         3 * b2 * b3 * b3 * c0120 + 6 * b2 * b3 * b4 * c0111 + 3 * b2 * b4 * b4 * c0102 +
         b3 * b3 * b3 * c0030 + 3 * b3 * b3 * b4 * c0021 + 3 * b3 * b4 * b4 * c0012 +
         b4 * b4 * b4 * c0003;
}

}  // namespace sumlab::transport
