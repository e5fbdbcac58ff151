#include "cilt/defect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cilt/parallel.hpp"
#include "json.hpp"

namespace cilt {

Complex HermiteSeg::eval(double t) const {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + t) * t0 +
         (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * t1;
}
Complex HermiteSeg::deriv(double t) const {
  const double t2 = t * t;
  return (6 * t2 - 6 * t) * p0 + (3 * t2 - 4 * t + 1) * t0 +
         (-6 * t2 + 6 * t) * p1 + (3 * t2 - 2 * t) * t1;
}
Complex HermiteSeg::deriv2(double t) const {
  return (12 * t - 6) * p0 + (6 * t - 4) * t0 + (-12 * t + 6) * p1 +
         (6 * t - 2) * t1;
}

void Arc::rebuild_shadow() {
  shadow.clear();
  const int per = 64;
  for (size_t s = 0; s < segs.size(); ++s) {
    const int i0 = s == 0 ? 0 : 1;
    for (int i = i0; i <= per; ++i) shadow.push_back(segs[s].eval((double)i / per));
  }
}

namespace {

// Signed segment intersection test; returns 0/1 and the parameters.
bool seg_intersect(Complex a0, Complex a1, Complex b0, Complex b1, double* ta,
                   double* tb) {
  const Complex r = a1 - a0, s = b1 - b0;
  const double rxs = r.real() * s.imag() - r.imag() * s.real();
  if (std::abs(rxs) < 1e-30) return false;
  const Complex qp = b0 - a0;
  const double t = (qp.real() * s.imag() - qp.imag() * s.real()) / rxs;
  const double u = (qp.real() * r.imag() - qp.imag() * r.real()) / rxs;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
  if (ta) *ta = t;
  if (tb) *tb = u;
  return true;
}

int count_crossings(const std::vector<Complex>& A, const std::vector<Complex>& B,
                    bool same_polyline) {
  int count = 0;
  for (size_t i = 0; i + 1 < A.size(); ++i)
    for (size_t j = 0; j + 1 < B.size(); ++j) {
      if (same_polyline && (i == j || i + 1 == j || j + 1 == i)) continue;
      double ta, tb;
      if (!seg_intersect(A[i], A[i + 1], B[j], B[j + 1], &ta, &tb)) continue;
      const Complex p = A[i] + ta * (A[i + 1] - A[i]);
      const double end_tol = 1e-6;
      // contact at shared graph endpoints is allowed
      if (std::abs(p - A.front()) < end_tol || std::abs(p - A.back()) < end_tol ||
          std::abs(p - B.front()) < end_tol || std::abs(p - B.back()) < end_tol)
        continue;
      ++count;
    }
  return count;
}

}  // namespace

namespace {
// geometry-only checks shared with incremental construction
bool arcs_geometry_ok(const DefectGraph& g);
bool arc_regular(const Arc& a);
}  // namespace

GraphCheck validate_graph(const DefectGraph& g) {
  GraphCheck c;
  const int n = g.n_points();
  if ((int)g.arcs.size() != n - 1) {
    c.reason = "arc count must be n-1 (tree)";
    return c;
  }
  // connectivity (union-find)
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& a : g.arcs) {
    int ra = find(a.from), rb = find(a.to);
    if (ra == rb) {
      c.reason = "graph has a cycle";
      return c;
    }
    parent[ra] = rb;
  }
  // orientation toward larger charge
  for (const auto& a : g.arcs)
    if (g.charges[a.from] > g.charges[a.to]) {
      c.reason = "arc oriented against increasing charge";
      return c;
    }
  // endpoint tangent prescription
  for (const auto& a : g.arcs) {
    const Complex va = std::polar(1.0, g.tangents[a.from]);
    const Complex vb = std::polar(1.0, g.tangents[a.to]);
    auto colinear_pos = [](Complex t, Complex v) {
      const double dot = t.real() * v.real() + t.imag() * v.imag();
      const double cross = t.real() * v.imag() - t.imag() * v.real();
      return dot > 0 && std::abs(cross) < 1e-9 * std::abs(t);
    };
    if (!colinear_pos(a.start_tangent(), va) || !colinear_pos(a.end_tangent(), vb)) {
      c.reason = "endpoint tangent mismatch";
      return c;
    }
  }
  // immersion / resolution
  for (const auto& a : g.arcs)
    if (!arc_regular(a)) {
      c.reason = "arc has a cusp or unresolved turning";
      return c;
    }
  // pairwise crossings
  for (size_t i = 0; i < g.arcs.size(); ++i) {
    c.crossings += count_crossings(g.arcs[i].shadow, g.arcs[i].shadow, true) / 2;
    for (size_t j = i + 1; j < g.arcs.size(); ++j)
      c.crossings += count_crossings(g.arcs[i].shadow, g.arcs[j].shadow, true);
  }
  if (c.crossings > 0) {
    c.reason = "arcs cross";
    return c;
  }
  // arcs must avoid non-endpoint insertions
  for (const auto& a : g.arcs)
    for (int j = 0; j < n; ++j) {
      if (j == a.from || j == a.to) continue;
      for (const Complex& p : a.shadow)
        if (std::abs(p - g.points[j]) < 1e-4) {
          c.reason = "arc passes through an insertion";
          return c;
        }
    }
  c.ok = true;
  return c;
}

namespace {

// Arcs must be immersed (no cusps) and resolved by their shadows: the
// turning integral is only meaningful when the speed stays bounded away
// from zero and consecutive shadow steps turn gently.
bool arc_regular(const Arc& a) {
  const double chord = std::abs(a.segs.back().p1 - a.segs.front().p0);
  for (const auto& s : a.segs)
    for (int i = 0; i <= 64; ++i)
      if (std::abs(s.deriv(i / 64.0)) < 0.05 * chord) return false;
  for (size_t i = 0; i + 2 < a.shadow.size(); ++i) {
    const Complex d1 = a.shadow[i + 1] - a.shadow[i];
    const Complex d2 = a.shadow[i + 2] - a.shadow[i + 1];
    const double turn = std::abs(std::arg(d2 / d1));
    if (turn > 0.30) return false;
  }
  return true;
}

bool arcs_geometry_ok(const DefectGraph& g) {
  for (const auto& a : g.arcs)
    if (!arc_regular(a)) return false;
  for (size_t i = 0; i < g.arcs.size(); ++i) {
    if (count_crossings(g.arcs[i].shadow, g.arcs[i].shadow, true) / 2 > 0)
      return false;
    for (size_t j = i + 1; j < g.arcs.size(); ++j)
      if (count_crossings(g.arcs[i].shadow, g.arcs[j].shadow, true) > 0) return false;
  }
  for (const auto& a : g.arcs)
    for (int j = 0; j < g.n_points(); ++j) {
      if (j == a.from || j == a.to) continue;
      for (const Complex& p : a.shadow)
        if (std::abs(p - g.points[j]) < 1e-4) return false;
    }
  return true;
}

// winding number of a closed polyline around a point
double polyline_winding(const std::vector<Complex>& loop, Complex z) {
  double total = 0;
  for (size_t i = 0; i + 1 < loop.size(); ++i)
    total += std::arg((loop[i + 1] - z) / (loop[i] - z));
  return total / TWO_PI;
}

// Path through the tree from vertex a to vertex b as a polyline over the arc
// shadows (empty when no path).
std::vector<Complex> tree_path(const DefectGraph& g, int a, int b,
                               int skip_arc = -1) {
  const int n = g.n_points();
  std::vector<int> prev(n, -1), via(n, -1);
  std::vector<char> seen(n, 0);
  std::vector<int> stack = {a};
  seen[a] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int e = 0; e < (int)g.arcs.size(); ++e) {
      if (e == skip_arc) continue;
      const Arc& arc = g.arcs[e];
      int w = -1;
      if (arc.from == v) w = arc.to;
      if (arc.to == v) w = arc.from;
      if (w < 0 || seen[w]) continue;
      seen[w] = 1;
      prev[w] = v;
      via[w] = e;
      stack.push_back(w);
    }
  }
  std::vector<Complex> path;
  if (!seen[b]) return path;
  // walk from b back to a, each piece oriented v -> prev[v]
  std::vector<std::vector<Complex>> pieces;
  int v = b;
  while (v != a) {
    const Arc& arc = g.arcs[via[v]];
    std::vector<Complex> piece = arc.shadow;
    if (arc.to == v) std::reverse(piece.begin(), piece.end());
    pieces.push_back(std::move(piece));
    v = prev[v];
  }
  // Interior junction vertices are insertion points where consecutive arcs
  // meet tangentially; the corridor there is resolved through the channel
  // between the two arc germs by trimming a few shadow points on both sides
  // and hopping straight across.
  const size_t trim = 3;
  for (size_t k = 0; k < pieces.size(); ++k) {
    auto piece = pieces[k];
    if (k > 0 && piece.size() > 2 * trim)
      piece.erase(piece.begin(), piece.begin() + trim);
    if (k + 1 < pieces.size() && piece.size() > 2 * trim)
      piece.resize(piece.size() - trim);
    path.insert(path.end(), piece.begin(), piece.end());
  }
  return path;  // runs b -> a
}

// The replacement arc must stay in the homotopy class of the corridor
// through the old tree: the loop (new arc) + (tree path back) may not wind
// around any insertion off the corridor. Arcs in a different class shift the
// regularized curvature by the invisible 8 pi^2 R Z quantum.
bool homotopy_class_ok(const DefectGraph& g_old, const Arc& candidate,
                       const std::vector<Complex>& pts) {
  std::vector<Complex> loop = candidate.shadow;  // from -> to
  std::vector<Complex> back = tree_path(g_old, candidate.from, candidate.to);
  if (back.empty() && candidate.from != candidate.to) return false;
  loop.insert(loop.end(), back.begin(), back.end());
  std::vector<char> on_corridor(pts.size(), 0);
  for (size_t j = 0; j < pts.size(); ++j)
    for (const Complex& p : back)
      if (std::abs(p - pts[j]) < 1e-9) on_corridor[j] = 1;
  on_corridor[candidate.from] = 1;
  on_corridor[candidate.to] = 1;
  for (size_t j = 0; j < pts.size(); ++j) {
    if (on_corridor[j]) continue;
    if (std::abs(polyline_winding(loop, pts[j])) > 0.25) return false;
  }
  return true;
}

Arc make_arc(int from, int to, Complex pa, Complex pb, double ang_a, double ang_b,
             double bend, double scale_a, double scale_b, double bend2 = 0.0) {
  // Hermite pieces through displaced interior knots, C^1 at the joints. With
  // bend2 == 0 a single displaced midpoint; otherwise two knots at 1/3 and
  // 2/3 with independent transverse offsets.
  Arc arc;
  arc.from = from;
  arc.to = to;
  const Complex chord = pb - pa;
  const double len = std::abs(chord);
  const Complex unit_n = Complex(0, 1) * chord / len;
  const Complex va = std::polar(scale_a * len, ang_a);
  const Complex vb = std::polar(scale_b * len, ang_b);
  if (bend2 == 0.0) {
    const Complex mid = 0.5 * (pa + pb) + bend * len * unit_n;
    const Complex vm = 0.5 * (pb - pa);
    arc.segs = {HermiteSeg{pa, mid, va, vm}, HermiteSeg{mid, pb, vm, vb}};
  } else {
    const Complex k1 = pa + chord / 3.0 + bend * len * unit_n;
    const Complex k2 = pa + 2.0 * chord / 3.0 + bend2 * len * unit_n;
    const Complex v1 = 0.5 * (k2 - pa);
    const Complex v2 = 0.5 * (pb - k1);
    arc.segs = {HermiteSeg{pa, k1, va, v1}, HermiteSeg{k1, k2, v1, v2},
                HermiteSeg{k2, pb, v2, vb}};
  }
  arc.rebuild_shadow();
  return arc;
}

}  // namespace

DefectGraph build_canonical_graph(const InsertionSet& insertions, double radius,
                                  std::uint64_t seed) {
  (void)radius;
  DefectGraph g;
  std::vector<int> magnetic;
  for (size_t i = 0; i < insertions.size(); ++i) magnetic.push_back((int)i);
  if ((int)magnetic.size() < 2)
    throw std::invalid_argument("build_canonical_graph: need >= 2 magnetic points");
  long long msum = 0;
  for (auto& ins : insertions) msum += ins.m;
  if (msum != 0)
    throw std::invalid_argument("build_canonical_graph: magnetic neutrality fails");

  for (const auto& ins : insertions) {
    if (ins.at_infinity)
      throw std::invalid_argument("build_canonical_graph: finite positions only");
    g.points.push_back(ins.position);
    g.charges.push_back(ins.m);
    g.tangents.push_back(ins.tangent);
  }
  // chain sorted by increasing charge (stable on ties)
  std::vector<int> order(insertions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return g.charges[a] < g.charges[b];
  });

  CounterRng rng{seed, 77};
  for (size_t p = 0; p + 1 < order.size(); ++p) {
    const int a = order[p], b = order[p + 1];
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      const double bend = attempt == 0 ? 0.0
                                       : 0.35 * (rng.uniform(16 * p + attempt) - 0.5) *
                                             (1 + attempt / 8);
      const double sa = 0.8 + 0.4 * rng.uniform(1000 + 16 * p + attempt);
      const double sb = 0.8 + 0.4 * rng.uniform(2000 + 16 * p + attempt);
      Arc arc = make_arc(a, b, g.points[a], g.points[b], g.tangents[a],
                         g.tangents[b], bend, sa, sb);
      // pin the homotopy class to the straight chord
      std::vector<Complex> loop = arc.shadow;
      loop.push_back(g.points[a]);
      bool class_ok = true;
      for (int j = 0; j < (int)g.points.size() && class_ok; ++j) {
        if (j == a || j == b) continue;
        if (std::abs(polyline_winding(loop, g.points[j])) > 0.25) class_ok = false;
      }
      if (!class_ok) continue;
      g.arcs.push_back(arc);
      placed = arcs_geometry_ok(g);
      if (!placed) g.arcs.pop_back();
    }
    if (!placed)
      throw std::runtime_error("build_canonical_graph: routing failed after retries");
  }
  GraphCheck final_check = validate_graph(g);
  if (!final_check.ok)
    throw std::runtime_error("build_canonical_graph: " + final_check.reason);
  return g;
}

double kappa_tree(const DefectGraph& g, double radius, int arc_index) {
  const int n = g.n_points();
  // component of the tree minus this arc containing the start vertex
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < (int)g.arcs.size(); ++i) {
    if (i == arc_index) continue;
    parent[find(g.arcs[i].from)] = find(g.arcs[i].to);
  }
  const int tail_root = find(g.arcs[arc_index].from);
  long long msum = 0;
  for (int j = 0; j < n; ++j)
    if (find(j) == tail_root) msum += g.charges[j];
  return TWO_PI * radius * (double)msum;
}

namespace {

}  // namespace

double kappa(const DefectGraph& g, double radius, int arc_index) {
  // The hugging loop of the tail subtree is the boundary of a thin tubular
  // neighborhood: it winds once around exactly the subtree's vertices (a
  // racetrack around a simple arc never encloses a pocketed point), so the
  // jump is the tree value for every valid embedding.
  return kappa_tree(g, radius, arc_index);
}

namespace {

struct Crossing {
  double t_on_query;
  int arc;
  double sign;  // +1 when the query segment crosses left -> right
};

// Signed crossings of the segment (a -> b) with all arc shadows.
bool collect_crossings(const DefectGraph& g, Complex a, Complex b,
                       std::vector<Crossing>& out) {
  out.clear();
  for (int ai = 0; ai < (int)g.arcs.size(); ++ai) {
    const auto& sh = g.arcs[ai].shadow;
    for (size_t j = 0; j + 1 < sh.size(); ++j) {
      double tq, tc;
      if (!seg_intersect(a, b, sh[j], sh[j + 1], &tq, &tc)) continue;
      if (tq < 1e-12 || tq > 1.0 - 1e-12 || tc < 1e-12 || tc > 1.0 - 1e-12) {
        // grazing contact: caller nudges and retries
        if (tc > 1e-12 && tc < 1.0 - 1e-12) return false;
        if (tq > 1e-12 && tq < 1.0 - 1e-12) return false;
        return false;
      }
      const Complex d = b - a;
      const Complex t = sh[j + 1] - sh[j];
      const Complex nleft = Complex(0, 1) * t;  // left normal of the arc
      const double dn = d.real() * nleft.real() + d.imag() * nleft.imag();
      if (std::abs(dn) < 1e-30) return false;
      out.push_back({tq, ai, dn < 0 ? 1.0 : -1.0});
    }
  }
  return true;
}

}  // namespace

namespace {
std::atomic<long long> g_nudge_count{0};
}  // namespace

long long raycast_nudge_count() { return g_nudge_count.load(); }

double primitive_raycast(const DefectGraph& g, const ClosedOneForm& form,
                         Complex x0, Complex x) {
  // straight-segment sweep plus jump corrections at cut crossings
  std::vector<double> jumps(g.arcs.size());
  for (size_t p = 0; p < g.arcs.size(); ++p)
    jumps[p] = kappa(g, form.radius, (int)p);
  std::vector<Crossing> cr;
  Complex xq = x;
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (collect_crossings(g, x0, xq, cr)) break;
    xq += std::polar(1e-9 * (attempt + 1), 0.7123 + attempt);  // nudge rule
    ++g_nudge_count;                                           // logged
    if (attempt == 7)
      throw std::runtime_error("primitive_raycast: persistent grazing contact");
  }
  double val = form.integrate_segment(x0, xq);
  for (const auto& c : cr) val += c.sign * jumps[c.arc];
  return val;
}

double primitive_at_infinity(const DefectGraph& g, const ClosedOneForm& form,
                             Complex x0) {
  // When x0 lies outside the convex hull of the cuts, the ray from x0 away
  // from the hull never meets the graph, so the primitive at infinity is the
  // segment sweep plus the exact angular tail
  //   Int_{ray a -> inf, direction d} d arg(z - z_j) = arg(d / (a - z_j)).
  Complex centroid{0, 0};
  size_t npts = 0;
  for (const auto& a : g.arcs)
    for (const Complex& p : a.shadow) {
      centroid += p;
      ++npts;
    }
  if (npts) centroid /= (double)npts;
  Complex dir = x0 - centroid;
  const bool outside = std::abs(dir) > 1e-9;
  double radius = 10.0;
  for (const auto& a : g.arcs)
    for (const Complex& p : a.shadow)
      radius = std::max(radius, 4.0 * std::abs(p - x0));
  if (outside) {
    dir /= std::abs(dir);
    const Complex far = x0 + radius * dir;
    // verify the escape ray is clear; otherwise fall back to raycasting
    std::vector<Crossing> cr;
    if (collect_crossings(g, x0, far, cr) && cr.empty()) {
      double val = form.integrate_segment(x0, far);
      for (size_t j = 0; j < form.points.size(); ++j)
        val += form.radius * (double)form.charges[j] *
               std::arg(dir / (far - form.points[j]));
      return val;
    }
  }
  const Complex dir2 = std::polar(1.0, 0.7123);
  const Complex far = x0 + radius * dir2;
  double val = primitive_raycast(g, form, x0, far);
  for (size_t j = 0; j < form.points.size(); ++j)
    val += form.radius * (double)form.charges[j] *
           std::arg(dir2 / (far - form.points[j]));
  return val;
}

double kappa_numeric(const DefectGraph& g, const ClosedOneForm& form,
                     int arc_index, Complex x0) {
  const auto& arc = g.arcs[arc_index];
  const Complex mid = arc.segs.front().eval(arc.segs.size() > 1 ? 1.0 : 0.5);
  const Complex tan =
      arc.segs.size() > 1 ? arc.segs[1].deriv(0.0) : arc.segs[0].deriv(0.5);
  const Complex nleft = Complex(0, 1) * tan / std::abs(tan);
  const double delta = 1e-5;
  const double right = primitive_raycast(g, form, x0, mid - delta * nleft);
  const double left = primitive_raycast(g, form, x0, mid + delta * nleft);
  return right - left;
}

double arc_geodesic_curvature(const Surface& surface, const Arc& arc) {
  // Int (k_e - d_n lambda) dl_e with n the left normal; composite
  // Gauss-Legendre panels per spline segment.
  std::vector<double> x, w;
  gauss_legendre(16, x, w);
  double total = 0;
  for (const auto& seg : arc.segs) {
    const int panels = 8;
    for (int p = 0; p < panels; ++p) {
      const double lo = (double)p / panels, hi = (double)(p + 1) / panels;
      for (size_t i = 0; i < x.size(); ++i) {
        const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[i];
        const double wt = 0.5 * (hi - lo) * w[i];
        const Complex d = seg.deriv(t), dd = seg.deriv2(t);
        const double speed = std::abs(d);
        const double ke = (d.real() * dd.imag() - d.imag() * dd.real()) /
                          (speed * speed * speed);
        const Complex nleft = Complex(0, 1) * d / speed;
        const Complex grad = surface.log_factor_gradient(seg.eval(t));
        const double dn = grad.real() * nleft.real() + grad.imag() * nleft.imag();
        total += (ke - dn) * speed * wt;
      }
    }
  }
  return total;
}

namespace {

// Int_{xi} *d lambda = Int (lambda_x y' - lambda_y x') dt along the arc.
double arc_star_dlambda(const Surface& surface, const Arc& arc) {
  std::vector<double> x, w;
  gauss_legendre(16, x, w);
  double total = 0;
  for (const auto& seg : arc.segs) {
    const int panels = 8;
    for (int p = 0; p < panels; ++p) {
      const double lo = (double)p / panels, hi = (double)(p + 1) / panels;
      for (size_t i = 0; i < x.size(); ++i) {
        const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[i];
        const double wt = 0.5 * (hi - lo) * w[i];
        const Complex d = seg.deriv(t);
        const Complex grad = surface.log_factor_gradient(seg.eval(t));
        total += (grad.real() * d.imag() - grad.imag() * d.real()) * wt;
      }
    }
  }
  return total;
}

// Smooth area integral Int_plane (nu . grad lambda) dA over the whole sphere:
// polar patches around the poles of nu plus two unit-disc charts (z and 1/z)
// with smooth cutoffs.
double area_nu_wedge_star_dlambda(const Surface& surface, const ClosedOneForm& nu) {
  struct Patch {
    Complex center;
    double rad;
  };
  std::vector<Patch> patches;
  for (size_t j = 0; j < nu.points.size(); ++j) {
    double d = 0.5;
    for (size_t l = 0; l < nu.points.size(); ++l)
      if (l != j) d = std::min(d, 0.45 * std::abs(nu.points[j] - nu.points[l]));
    patches.push_back({nu.points[j], d});
  }
  auto cutoff = [&](Complex z) {
    double c = 1.0;
    for (const auto& p : patches) {
      const double r = std::abs(z - p.center) / p.rad;
      if (r < 1.0) {
        const double u = r * r * (3 - 2 * r);  // smoothstep in r
        c *= u * u * (3 - 2 * u);
      }
    }
    return c;
  };
  auto integrand = [&](Complex z) {
    const Complex v = nu.covector(z);
    const Complex grad = surface.log_factor_gradient(z);
    return v.real() * grad.real() + v.imag() * grad.imag();
  };

  double total = 0;

  // polar patches (integrand ~ 1/r, the polar Jacobian absorbs it)
  std::vector<double> gr, gw;
  gauss_legendre(48, gr, gw);
  const int nth = 192;
  for (const auto& p : patches) {
    double acc = 0;
    for (size_t i = 0; i < gr.size(); ++i) {
      const double r = 0.5 * p.rad * (gr[i] + 1.0);
      const double wr = 0.5 * p.rad * gw[i];
      for (int j = 0; j < nth; ++j) {
        const double th = TWO_PI * (j + 0.5) / nth;
        const Complex z = p.center + std::polar(r, th);
        acc += integrand(z) * (1.0 - cutoff(z)) * r * wr;
      }
    }
    total += acc * TWO_PI / nth;
  }

  // remainder on two polar unit-disc charts; in the w = 1/z chart the
  // integrand picks up the 1/|w|^4 Jacobian
  const int nr = 96, nthd = 256;
  std::vector<double> dr, dw;
  gauss_legendre_ab(nr, 0.0, 1.0, dr, dw);
  for (int chart = 0; chart < 2; ++chart) {
    double acc = 0;
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nthd; ++j) {
        const double th = TWO_PI * (j + 0.5) / nthd;
        const Complex zc = std::polar(dr[i], th);
        Complex z = zc;
        double jac = 1.0;
        if (chart == 1) {
          if (std::abs(zc) < 1e-13) continue;
          z = 1.0 / zc;
          jac = 1.0 / sq(std::norm(zc));
        }
        acc += integrand(z) * cutoff(z) * jac * dr[i] * dw[i] * (TWO_PI / nthd);
      }
    total += acc;
  }
  return total;
}

}  // namespace

double regularized_curvature(const Surface& surface, const ClosedOneForm& form,
                             const DefectGraph& g, Complex x0) {
  if (surface.kind == Surface::Kind::torus) {
    // flat metric: K = 0 and straight cycles have k_g = 0
    return 0.0;
  }
  if (surface.kind != Surface::Kind::sphere ||
      surface.sphere_metric == Surface::SphereMetric::g0)
    throw std::invalid_argument("regularized_curvature: smooth sphere metrics only");
  if (form.repr != ClosedOneForm::Repr::sphere_magnetic)
    throw std::invalid_argument("regularized_curvature: magnetic sphere form");

  // Int_{cut complement} I K dv = 2 Int nu ^ *d lambda
  //                               + 2 sum_p kappa_p Int_{xi_p} *d lambda
  //                               + 8 pi I(infinity)
  // (the slit boundary of the complement runs forward along the left face,
  // so the jump I_left - I_right = -kappa_p enters with the minus sign).
  // The area term vanishes identically for harmonic nu and is kept as a
  // consistency term for conformally deformed metrics.
  const double area = 2.0 * area_nu_wedge_star_dlambda(surface, form);
  double cuts = 0, counter = 0;
  for (int p = 0; p < (int)g.arcs.size(); ++p) {
    const double kp = kappa(g, form.radius, p);
    cuts += kp * arc_star_dlambda(surface, g.arcs[p]);
    counter += kp * arc_geodesic_curvature(surface, g.arcs[p]);
  }
  const double inf_term = 8.0 * PI * primitive_at_infinity(g, form, x0);
  return area + 2.0 * cuts + inf_term - 2.0 * counter;
}


// Replace one arc by a new arc (new_from -> new_to) routed in the homotopy
// class of the corridor through the old tree.
DefectGraph rewire_arc(const DefectGraph& g, int arc_index, int new_from,
                       int new_to, std::uint64_t seed, const char* who,
                       bool pin_class) {
  CounterRng rng{seed, 41};
  DefectGraph out = g;
  for (int attempt = 0; attempt < 256; ++attempt) {
    const double spread = 1.0 + attempt / 40.0;
    const double bend = 0.5 * (rng.uniform(4 * attempt) - 0.5) * spread;
    const double sa = 0.5 + 1.0 * rng.uniform(4 * attempt + 1);
    const double sb = 0.5 + 1.0 * rng.uniform(4 * attempt + 2);
    const double bend2 =
        attempt % 2 ? 0.5 * (rng.uniform(4 * attempt + 3) - 0.5) * spread : 0.0;
    Arc candidate =
        make_arc(new_from, new_to, g.points[new_from], g.points[new_to],
                 g.tangents[new_from], g.tangents[new_to], bend, sa, sb, bend2);
    if (pin_class && !homotopy_class_ok(g, candidate, g.points)) continue;
    out.arcs[arc_index] = candidate;
    if (validate_graph(out).ok) return out;
    out.arcs[arc_index] = g.arcs[arc_index];
  }
  throw std::runtime_error(std::string(who) + ": routing failed");
}

DefectGraph s_move(const DefectGraph& g, int arc_index, std::uint64_t seed) {
  CounterRng rng{seed, 29};
  DefectGraph out = g;
  const Arc& old = g.arcs[arc_index];
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double bend = 0.45 * (rng.uniform(2 * attempt) - 0.5) * (1 + attempt / 10.0);
    const double sa = 0.6 + 0.8 * rng.uniform(2 * attempt + 1);
    const double sb = 0.6 + 0.8 * rng.uniform(1001 + attempt);
    Arc candidate = make_arc(old.from, old.to, g.points[old.from], g.points[old.to],
                             g.tangents[old.from], g.tangents[old.to], bend, sa, sb);
    if (!homotopy_class_ok(g, candidate, g.points)) continue;
    out.arcs[arc_index] = candidate;
    if (validate_graph(out).ok) return out;
  }
  throw std::runtime_error("s_move: routing failed");
}

DefectGraph a_move(const DefectGraph& g, int p, int p_prime, std::uint64_t seed) {
  // arcs p, p' arrive at the same vertex; replace p by an arc from p's start
  // to p'-s start, routed along the corridor xi_{p'}^{-1} o xi_p
  const Arc& ap = g.arcs[p];
  const Arc& aq = g.arcs[p_prime];
  if (ap.to != aq.to) throw std::invalid_argument("a_move: arcs must share arrival");
  int jp = ap.from, jq = aq.from;
  if (g.charges[jq] < g.charges[jp])
    throw std::invalid_argument("a_move: needs m_{j''} >= m_{j'}");
  return rewire_arc(g, p, jp, jq, seed, "a_move");
}

DefectGraph d_move(const DefectGraph& g, int p, int p_prime, std::uint64_t seed) {
  const Arc& ap = g.arcs[p];
  const Arc& aq = g.arcs[p_prime];
  if (ap.from != aq.from)
    throw std::invalid_argument("d_move: arcs must share departure");
  int jp = ap.to, jq = aq.to;
  if (g.charges[jq] < g.charges[jp])
    throw std::invalid_argument("d_move: needs m_{j''} >= m_{j'}");
  return rewire_arc(g, p, jp, jq, seed, "d_move");
}

double rotate_tangent_shift(const Surface& surface, const ClosedOneForm& form,
                            const DefectGraph& g, int j, double theta, Complex x0) {
  if (std::abs(theta) >= PI)
    throw std::invalid_argument("rotate_tangent_shift: |theta| < pi");
  const double base = regularized_curvature(surface, form, g, x0);
  InsertionSet ins;
  for (int i = 0; i < g.n_points(); ++i) {
    Insertion q;
    q.position = g.points[i];
    q.m = g.charges[i];
    q.tangent = g.tangents[i] + (i == j ? theta : 0.0);
    ins.push_back(q);
  }
  DefectGraph rotated = build_canonical_graph(ins, form.radius, 1234);
  const double after = regularized_curvature(surface, form, rotated, x0);
  return after - base;
}

std::string DefectGraph::to_json() const {
  nlohmann::json j;
  for (size_t i = 0; i < points.size(); ++i) {
    j["points"].push_back({points[i].real(), points[i].imag()});
    j["charges"].push_back(charges[i]);
    j["tangents"].push_back(tangents[i]);
  }
  for (const auto& a : arcs) {
    nlohmann::json ja;
    ja["from"] = a.from;
    ja["to"] = a.to;
    for (const auto& s : a.segs)
      ja["segs"].push_back({s.p0.real(), s.p0.imag(), s.p1.real(), s.p1.imag(),
                            s.t0.real(), s.t0.imag(), s.t1.real(), s.t1.imag()});
    j["arcs"].push_back(ja);
  }
  return j.dump(2);
}

DefectGraph DefectGraph::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  DefectGraph g;
  for (size_t i = 0; i < j["points"].size(); ++i) {
    g.points.push_back({j["points"][i][0], j["points"][i][1]});
    g.charges.push_back(j["charges"][i]);
    g.tangents.push_back(j["tangents"][i]);
  }
  for (const auto& ja : j["arcs"]) {
    Arc a;
    a.from = ja["from"];
    a.to = ja["to"];
    for (const auto& js : ja["segs"]) {
      HermiteSeg s;
      s.p0 = {js[0], js[1]};
      s.p1 = {js[2], js[3]};
      s.t0 = {js[4], js[5]};
      s.t1 = {js[6], js[7]};
      a.segs.push_back(s);
    }
    a.rebuild_shadow();
    g.arcs.push_back(a);
  }
  return g;
}

}  // namespace cilt
