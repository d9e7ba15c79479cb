#include "shapeinst/scanplane.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>

namespace shapeinst {

namespace {

struct EdgeGraph {
  std::vector<Eigen::Vector3d> points;
  std::vector<std::vector<int>> neighbours;
  std::unordered_map<std::uint64_t, int> node_of_edge;

  int node(std::uint64_t key, const Eigen::Vector3d& p) {
    const auto [it, inserted] = node_of_edge.emplace(key, static_cast<int>(points.size()));
    if (inserted) {
      points.push_back(p);
      neighbours.emplace_back();
    }
    return it->second;
  }
};

std::vector<Eigen::Vector2d> dedupe(std::vector<Eigen::Vector2d> pts, bool closed,
                                    double tol) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    if (out.empty() || (p - out.back()).norm() > tol) out.push_back(p);
  }
  if (closed) {
    while (out.size() > 1 && (out.front() - out.back()).norm() <= tol) out.pop_back();
  }
  return out;
}

PlanarContour to_contour(const std::vector<Eigen::Vector2d>& pts, bool closed) {
  PlanarContour c;
  c.closed = closed;
  c.vertices.resize(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    c.vertices.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  }
  return c;
}

}  // namespace

double PlanarContour::perimeter() const {
  const Eigen::Index m = vertices.rows();
  if (m < 2) return 0.0;
  double len = 0.0;
  for (Eigen::Index i = 0; i + 1 < m; ++i) len += (vertices.row(i + 1) - vertices.row(i)).norm();
  if (closed) len += (vertices.row(0) - vertices.row(m - 1)).norm();
  return len;
}

double PlanarContour::signed_area() const {
  const Eigen::Index m = vertices.rows();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = (i + 1) % m;
    acc += vertices(i, 0) * vertices(j, 1) - vertices(j, 0) * vertices(i, 1);
  }
  return 0.5 * acc;
}

SliceResult slice_mesh(const Frame3& vertices, const std::vector<Triangle>& triangles,
                       const ScanPlane& plane) {
  const Eigen::Index nv = vertices.rows();
  Eigen::VectorXd dist(nv);
  for (Eigen::Index i = 0; i < nv; ++i) {
    dist(i) = plane.signed_distance(vertices.row(i).transpose());
  }
  const auto positive = [&](int i) { return dist(i) >= 0.0; };

  EdgeGraph g;
  const auto crossing = [&](int u, int v) {
    const int lo = std::min(u, v);
    const int hi = std::max(u, v);
    // Evaluate from the lower index so both adjacent triangles get the same bits.
    const double t = dist(lo) / (dist(lo) - dist(hi));
    const Eigen::Vector3d p =
        vertices.row(lo).transpose() + t * (vertices.row(hi) - vertices.row(lo)).transpose();
    const std::uint64_t key =
        static_cast<std::uint64_t>(lo) * static_cast<std::uint64_t>(nv) + static_cast<std::uint64_t>(hi);
    return g.node(key, p);
  };

  for (const auto& tri : triangles) {
    const bool s0 = positive(tri[0]), s1 = positive(tri[1]), s2 = positive(tri[2]);
    if (s0 == s1 && s1 == s2) continue;
    int ends[2];
    int k = 0;
    for (int e = 0; e < 3; ++e) {
      const int u = tri[e];
      const int v = tri[(e + 1) % 3];
      if (positive(u) != positive(v)) ends[k++] = crossing(u, v);
    }
    if (ends[0] == ends[1]) continue;
    g.neighbours[static_cast<std::size_t>(ends[0])].push_back(ends[1]);
    g.neighbours[static_cast<std::size_t>(ends[1])].push_back(ends[0]);
  }
  if (g.points.empty()) {
    throw Error(ErrorKind::no_intersection, "slice_mesh: plane does not intersect the mesh");
  }

  // Walk chains: open ones first (from degree-1 nodes), then cycles.
  const std::size_t n = g.points.size();
  std::vector<char> used(n, 0);
  struct Loop {
    std::vector<int> nodes;
    bool closed;
  };
  std::vector<Loop> loops;
  const auto walk = [&](int start) {
    Loop loop{{start}, false};
    used[static_cast<std::size_t>(start)] = 1;
    int prev = -1, cur = start;
    for (;;) {
      int next = -1;
      for (int nb : g.neighbours[static_cast<std::size_t>(cur)]) {
        if (nb == prev) continue;
        if (nb == start && loop.nodes.size() > 2) {
          loop.closed = true;
          break;
        }
        if (!used[static_cast<std::size_t>(nb)]) {
          next = nb;
          break;
        }
      }
      if (loop.closed || next < 0) break;
      used[static_cast<std::size_t>(next)] = 1;
      loop.nodes.push_back(next);
      prev = cur;
      cur = next;
    }
    loops.push_back(std::move(loop));
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i] && g.neighbours[i].size() == 1) walk(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) walk(static_cast<int>(i));
  }

  const double scale = std::max(1.0, vertices.cwiseAbs().maxCoeff());
  std::optional<PlanarContour> best;
  double best_len = -1.0;
  int found = 0;
  for (const auto& loop : loops) {
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(loop.nodes.size());
    for (int id : loop.nodes) pts.push_back(plane.to_plane(g.points[static_cast<std::size_t>(id)]));
    pts = dedupe(std::move(pts), loop.closed, 1e-12 * scale);
    if (pts.size() < 2 || (loop.closed && pts.size() < 3)) continue;
    ++found;
    PlanarContour c = to_contour(pts, loop.closed);
    const double len = c.perimeter();
    // Prefer closed loops over open fragments of similar length.
    const double rank = len + (c.closed ? 0.0 : -1e-9 * scale);
    if (rank > best_len) {
      best_len = rank;
      best = std::move(c);
    }
  }
  if (!best) {
    throw Error(ErrorKind::no_intersection, "slice_mesh: intersection is degenerate");
  }
  if (best->closed && best->signed_area() < 0.0) {
    best->vertices = best->vertices.colwise().reverse().eval();
  }
  return SliceResult{std::move(*best), found, found - 1};
}

ContourSequence2D build_contour_sequence(const ShapeSequence3D& seq, const ScanPlane& plane,
                                         Eigen::Index num_points, Execution ex) {
  const auto n = static_cast<long>(seq.num_frames());
  std::vector<Frame2> frames(static_cast<std::size_t>(n));
  std::vector<std::optional<Error>> errors(static_cast<std::size_t>(n));
  std::vector<char> closed(static_cast<std::size_t>(n), 1);

  const auto one = [&](long t) {
    const auto ut = static_cast<std::size_t>(t);
    try {
      const auto sliced = slice_mesh(seq.frame(ut), seq.triangles(), plane);
      const auto res = resample_contour(sliced.contour, num_points);
      frames[ut] = res.vertices;
      closed[ut] = res.closed ? 1 : 0;
    } catch (const Error& e) {
      errors[ut] = Error(e.kind(), "frame " + std::to_string(t) + ": " + e.what());
    }
  };
  if (ex == Execution::serial) {
    for (long t = 0; t < n; ++t) one(t);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (long t = 0; t < n; ++t) one(t);
  }
  for (const auto& e : errors) {
    if (e) throw *e;
  }
  const bool all_closed = std::all_of(closed.begin(), closed.end(), [](char c) { return c; });
  return ContourSequence2D(std::move(frames), all_closed);
}

}  // namespace shapeinst
