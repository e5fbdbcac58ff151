#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cilt/forms.hpp"
#include "cilt/geometry.hpp"
#include "cilt/params.hpp"

namespace cilt {

// Oriented branch-cut arcs joining magnetic insertions: cubic Hermite splines
// with 64-segment polyline shadows for intersection tests and line quadrature.
struct HermiteSeg {
  Complex p0, p1, t0, t1;

  Complex eval(double t) const;
  Complex deriv(double t) const;
  Complex deriv2(double t) const;
};

struct Arc {
  int from = 0, to = 0;  // insertion indices, oriented toward larger charge
  std::vector<HermiteSeg> segs;
  std::vector<Complex> shadow;  // polyline, 64 points per segment

  void rebuild_shadow();
  Complex start_tangent() const { return segs.front().t0; }
  Complex end_tangent() const { return segs.back().t1; }
};

struct DefectGraph {
  std::vector<Complex> points;
  std::vector<long long> charges;
  std::vector<double> tangents;  // angle of v_j
  std::vector<Arc> arcs;

  int n_points() const { return (int)points.size(); }

  std::string to_json() const;
  static DefectGraph from_json(const std::string& text);
};

// Validation: arcs simple and pairwise non-crossing away from shared
// endpoints, tree spanning all insertions, endpoint tangents positively
// colinear with the prescribed directions.
struct GraphCheck {
  bool ok = false;
  int crossings = 0;
  std::string reason;
};
GraphCheck validate_graph(const DefectGraph& g);

// Canonical charge-sorted chain graph with spline arcs honoring the endpoint
// tangents, re-routed by control point perturbation on crossing (bounded
// retries).
DefectGraph build_canonical_graph(const InsertionSet& insertions, double radius,
                                  std::uint64_t seed = 0);

// kappa(xi_p): the jump of the primitive across the arc, an exact multiple of
// 2 pi R. Solved from the embedding's winding bookkeeping (a small integer
// linear system over the straight-segment sweeps) and rounded to the lattice;
// correct also when an arc wraps around other insertions.
double kappa(const DefectGraph& g, double radius, int arc_index);

// Tree-traversal value 2 pi R * (sum of charges in the component of the tree
// minus the arc containing its start vertex); equals kappa for unwrapped
// embeddings such as the canonical chain.
double kappa_tree(const DefectGraph& g, double radius, int arc_index);

// Numeric oracle for kappa: jump of the ray-cast primitive across the arc
// midpoint, I(right) - I(left).
double kappa_numeric(const DefectGraph& g, const ClosedOneForm& form,
                     int arc_index, Complex x0);

// Running count of grazing-contact nudges taken by the ray caster.
long long raycast_nudge_count();

// Primitive of the magnetic form on the cut complement, vanishing at x0.
// Ray casting against the cut polylines; near-tangency resolved by nudging
// the query point (1e-9 steps, logged through the retry counter).
double primitive_raycast(const DefectGraph& g, const ClosedOneForm& form,
                         Complex x0, Complex x);

// Limit of the primitive at the sphere's infinity (chart w = 1/z).
double primitive_at_infinity(const DefectGraph& g, const ClosedOneForm& form,
                             Complex x0);

// Regularized curvature integral
//   Int_reg I(nu) K_g dv - 2 sum_p kappa_p Int_{xi_p} k_g dl_g .
// The cut-complement integral is evaluated through the exact identity
// K_g dv_g = -2 d(*d lambda): one smooth area integral Int nu ^ * d lambda
// (no cuts), per-arc line integrals of *d lambda weighted by kappa, and the
// primitive value at infinity. Quadrature is parallel over nodes.
double regularized_curvature(const Surface& surface, const ClosedOneForm& form,
                             const DefectGraph& g, Complex x0);

// Geodesic curvature line integral Int_{xi_p} k_g dl_g for the conformal
// sphere metrics, k_g dl_g = (k_euclid - d_n lambda) dl_euclid with the left
// normal.
double arc_geodesic_curvature(const Surface& surface, const Arc& arc);

// Moves (paper's S/A/D deformations). S reroutes one arc keeping endpoints
// and tangents; A moves an arrival edge, D a departure edge. All return a
// validated graph; throws std::runtime_error on routing failure.
DefectGraph s_move(const DefectGraph& g, int arc_index, std::uint64_t seed);
// Replace arc arc_index by an arc (new_from -> new_to) routed in the homotopy
// class of the corridor through the old tree (the move mechanics shared by
// the A and D moves).
// With pin_class false the replacement may land in a different homotopy
// class; valid graphs in different classes shift the regularized curvature by
// an (invisible in the correlator phase, since Q R is an integer) multiple of
// 8 pi^2 R.
DefectGraph rewire_arc(const DefectGraph& g, int arc_index, int new_from,
                       int new_to, std::uint64_t seed, const char* who = "rewire",
                       bool pin_class = true);
DefectGraph a_move(const DefectGraph& g, int p, int p_prime, std::uint64_t seed);
DefectGraph d_move(const DefectGraph& g, int p, int p_prime, std::uint64_t seed);

// Difference of regularized curvature after rotating insertion j's tangent by
// theta (|theta| < pi). Contract: 4 pi R m_j theta.
double rotate_tangent_shift(const Surface& surface, const ClosedOneForm& form,
                            const DefectGraph& g, int j, double theta,
                            Complex x0);

}  // namespace cilt
