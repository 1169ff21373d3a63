#pragma once

#include "strokeforge/geometry.hpp"
#include "strokeforge/types.hpp"

#include <functional>
#include <vector>

namespace sf {

// A stroke held in its continuous form plus appearance. Creation index
// doubles as depth: newer strokes composite in front.
struct Stroke {
    BezierChain chain;
    Vec3 color = Vec3(0, 0, 0);   // RGB in [0,1]
    double opacity = 1.0;         // clamped to [0,1]
    double width = 4.0;           // pixels, >= w_min
    double height = 0.0;          // height units, >= 0
    int id = 0;
};

using StrokeSet = std::vector<Stroke>;

struct RenderConfig {
    double tau = 0.7;             // kernel softness
    int n_samples = 10;           // polyline samples per chain
    Vec3 background = Vec3(1, 1, 1);
    int tile_size = 16;
    int threads = 1;
    double w_min = 0.5;
};

struct Canvas {
    ImageBuf color;          // H x W x 3
    ImageBuf height;         // H x W
    ImageBuf transmittance;  // H x W, product of (1 - alpha)

    Canvas() = default;
    Canvas(int h, int w, const Vec3& bg)
        : color(h, w, 3), height(h, w, 1), transmittance(h, w, 1, 1.0) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c) color.at(y, x, c) = bg[c];
    }
};

// Point-to-segment distance with analytic partials. At the
// interior/endpoint boundary the active branch's one-sided derivative
// is returned.
struct SegmentDistance {
    double d;
    Vec2 d_x, d_a, d_b;
    double t;  // projection parameter, clamped to [0,1]
};
SegmentDistance segment_distance(const Vec2& x, const Vec2& a, const Vec2& b);

// Soft anisotropic splat profile:
//   k = [sigma((w/2 - d)/tau) - sigma(-w/2/tau)] / [1 - 2 sigma(-w/2/tau)]
// k(0) = 1, k(w/2) = 1/2, k(w) = 0; negative beyond d = w (clamped by
// the opacity model downstream).
struct KernelValue {
    double k;
    double dk_dd;
    double dk_dw;
};
KernelValue splat_kernel(double d, double w, double tau);

// Per-stroke geometry cache shared by the forward and backward passes.
struct StrokeGeom {
    Polyline samples;
    std::vector<double> cumlen;  // arc length at each sampled vertex
    int x0, y0, x1, y1;          // inflated bbox, half-open, clipped
    bool empty;                  // bbox does not intersect the image
};
StrokeGeom build_stroke_geom(const Stroke& s, const RenderConfig& cfg,
                             int height, int width);

// Optional per-pixel height override used by the relighting pass:
// (stroke index, pixel x, pixel y, kernel value, arc-length coordinate)
// -> height value composited in place of the stroke's scalar height.
using HeightEval =
    std::function<double(int stroke, int px, int py, double k, double arc)>;

// Front-to-back splat compositing of the whole stroke set, tiled and
// data-parallel over pixels. Per-pixel compositing order is fixed
// (newest first), so output is bit-identical for any thread count.
// Heights ride the same per-pixel weights as color. `bg_height`, when
// given, occupies the background layer of the height buffer.
Canvas render_forward(const StrokeSet& strokes, const RenderConfig& cfg,
                      int height, int width,
                      const HeightEval* height_eval = nullptr,
                      const ImageBuf* bg_height = nullptr,
                      ImageBuf* weight_sum = nullptr);

// Composites one stroke in front of an existing canvas, touching only
// its inflated bounding box. Equivalent to appending the stroke and
// re-rendering (up to rounding), which makes the search loop cheap.
void composite_front(Canvas& canvas, const Stroke& s, const RenderConfig& cfg);

struct StrokeGrads {
    std::vector<Vec2> d_ctrl;
    Vec3 d_color = Vec3::Zero();
    double d_opacity = 0;
    double d_width = 0;
    double d_height = 0;
};

// Exact adjoint of render_forward as implemented: the max(0,k) clamp
// passes zero gradient where clamped, the min-over-segments distance
// routes its subgradient to the unique nearest segment (ties toward the
// lower index), and vertex gradients chain through the Bernstein
// sampling weights to the control points.
std::vector<StrokeGrads> render_backward(const StrokeSet& strokes,
                                         const RenderConfig& cfg,
                                         const ImageBuf& grad_color,
                                         const ImageBuf* grad_height = nullptr);

}  // namespace sf
