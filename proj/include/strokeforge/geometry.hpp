#pragma once

#include "strokeforge/types.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

namespace sf {

// Discrete side of the dual stroke representation: ordered vertices in
// pixel coordinates.
struct Polyline {
    std::vector<Vec2> pts;

    Polyline() = default;
    explicit Polyline(std::vector<Vec2> p) : pts(std::move(p)) {}
    size_t size() const { return pts.size(); }
    double length() const;
};

// Continuous side: a C0 chain of cubic segments stored as 3*S+1 unique
// control points. Segment s owns control points [3s, 3s+3]; consecutive
// segments share their boundary point by construction.
struct BezierChain {
    std::vector<Vec2> ctrl;

    int segment_count() const { return static_cast<int>((ctrl.size() - 1) / 3); }
    bool valid() const { return ctrl.size() >= 4 && (ctrl.size() - 1) % 3 == 0; }
    Vec2 eval(double u) const;           // u in [0,1] over the whole chain
    Vec2 eval_segment(int s, double t) const;
};

// Chord-length parameters of a polyline: t_0 = 0, t_{M-1} = 1, strictly
// increasing. Throws "degenerate-polyline" when the total length is zero.
std::vector<double> chord_length_params(const Polyline& poly);

// Bernstein basis matrix: rows = params, cols = degree+1,
// B[m][k] = C(degree,k) t^k (1-t)^(degree-k). Rows sum to 1.
Eigen::MatrixXd bernstein_matrix(const std::vector<double>& params, int degree);

// Drops exact consecutive duplicates (traces may stall for a step).
Polyline collapse_duplicates(const Polyline& poly);

// Least-squares cubic fit through the chord-length parameterization,
// split into one segment per 6 polyline edges. Polylines with at most
// 4 distinct vertices take the Catmull-Rom route instead.
BezierChain fit_bezier(const Polyline& poly);

// Uniform Catmull-Rom through the vertices, each span converted to the
// equivalent cubic Bezier (C1 at interior joins).
BezierChain catmull_rom_chain(const Polyline& poly);

// Evaluates the chain at n uniformly spaced global parameters.
Polyline sample_bezier(const BezierChain& chain, int n_samples);

// Sparse Jacobian of sample_bezier: each sampled vertex is a convex
// combination of the 4 control points of its segment.
struct SampleJacobian {
    std::vector<int> ctrl_base;   // first control-point index per sample
    Eigen::MatrixX4d weights;     // Bernstein weights per sample, rows sum to 1
};
SampleJacobian sample_bezier_jacobian(const BezierChain& chain, int n_samples);

// Symmetric mean nearest-vertex distance between two vertex sets.
double chamfer_distance(const Polyline& a, const Polyline& b);

}  // namespace sf
