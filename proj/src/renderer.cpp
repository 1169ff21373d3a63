#include "strokeforge/renderer.hpp"

#include "strokeforge/parallel.hpp"

#include <cmath>

namespace sf {

SegmentDistance segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
    SegmentDistance out;
    Vec2 v = b - a;
    double L2 = v.squaredNorm();
    double t = 0.0;
    if (L2 > 0.0) t = std::clamp((x - a).dot(v) / L2, 0.0, 1.0);
    out.t = t;
    if (t <= 0.0 || L2 == 0.0) {
        Vec2 e = x - a;
        out.d = e.norm();
        Vec2 n = out.d > 0 ? Vec2(e / out.d) : Vec2(0, 0);
        out.d_x = n;
        out.d_a = -n;
        out.d_b = Vec2(0, 0);
    } else if (t >= 1.0) {
        Vec2 e = x - b;
        out.d = e.norm();
        Vec2 n = out.d > 0 ? Vec2(e / out.d) : Vec2(0, 0);
        out.d_x = n;
        out.d_a = Vec2(0, 0);
        out.d_b = -n;
    } else {
        // interior foot: the projection parameter is stationary, so the
        // exact partials only move the segment rigidly
        Vec2 e = x - (a + t * v);
        out.d = e.norm();
        Vec2 n = out.d > 0 ? Vec2(e / out.d) : Vec2(0, 0);
        out.d_x = n;
        out.d_a = -(1.0 - t) * n;
        out.d_b = -t * n;
    }
    return out;
}

static inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

KernelValue splat_kernel(double d, double w, double tau) {
    double su = sigmoid((w / 2 - d) / tau);
    double sv = sigmoid(-w / (2 * tau));
    double den = 1.0 - 2.0 * sv;
    double num = su - sv;
    double dsu = su * (1.0 - su);
    double dsv = sv * (1.0 - sv);
    KernelValue out;
    out.k = num / den;
    out.dk_dd = -dsu / tau / den;
    // both numerator and denominator depend on w
    double dnum_dw = (dsu + dsv) / (2 * tau);
    double dden_dw = dsv / tau;
    out.dk_dw = (dnum_dw * den - num * dden_dw) / (den * den);
    return out;
}

StrokeGeom build_stroke_geom(const Stroke& s, const RenderConfig& cfg,
                             int height, int width) {
    StrokeGeom g;
    g.samples = sample_bezier(s.chain, cfg.n_samples);
    g.cumlen.assign(g.samples.size(), 0.0);
    for (size_t i = 1; i < g.samples.size(); ++i)
        g.cumlen[i] =
            g.cumlen[i - 1] + (g.samples.pts[i] - g.samples.pts[i - 1]).norm();
    double inflate = s.width / 2 + 5.0 * cfg.tau;
    double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
    for (const auto& p : g.samples.pts) {
        minx = std::min(minx, p.x());
        maxx = std::max(maxx, p.x());
        miny = std::min(miny, p.y());
        maxy = std::max(maxy, p.y());
    }
    g.x0 = std::max(0, static_cast<int>(std::floor(minx - inflate)));
    g.y0 = std::max(0, static_cast<int>(std::floor(miny - inflate)));
    g.x1 = std::min(width, static_cast<int>(std::floor(maxx + inflate)) + 1);
    g.y1 = std::min(height, static_cast<int>(std::floor(maxy + inflate)) + 1);
    g.empty = g.x0 >= g.x1 || g.y0 >= g.y1;
    return g;
}

namespace {

struct Nearest {
    double d;
    int seg;
    SegmentDistance sd;
};

// Min distance over the stroke's segments; exact ties keep the lower
// segment index.
Nearest nearest_segment(const StrokeGeom& g, const Vec2& p) {
    const auto& v = g.samples.pts;
    Nearest best{1e300, -1, {}};
    for (size_t j = 0; j + 1 < v.size(); ++j) {
        SegmentDistance sd = segment_distance(p, v[j], v[j + 1]);
        if (sd.d < best.d) {
            best.d = sd.d;
            best.seg = static_cast<int>(j);
            best.sd = sd;
        }
    }
    return best;
}

struct TileGrid {
    int ts, tx, ty;
    std::vector<std::vector<int>> strokes;  // front-to-back per tile

    TileGrid(int height, int width, int tile_size, const StrokeSet& set,
             const std::vector<StrokeGeom>& geoms)
        : ts(tile_size),
          tx((width + tile_size - 1) / tile_size),
          ty((height + tile_size - 1) / tile_size),
          strokes(static_cast<size_t>(tx) * ty) {
        for (int i = static_cast<int>(set.size()) - 1; i >= 0; --i) {
            const auto& g = geoms[i];
            if (g.empty) continue;
            for (int yt = g.y0 / ts; yt <= (g.y1 - 1) / ts; ++yt)
                for (int xt = g.x0 / ts; xt <= (g.x1 - 1) / ts; ++xt)
                    strokes[static_cast<size_t>(yt) * tx + xt].push_back(i);
        }
    }
};

}  // namespace

Canvas render_forward(const StrokeSet& strokes, const RenderConfig& cfg,
                      int height, int width, const HeightEval* height_eval,
                      const ImageBuf* bg_height, ImageBuf* weight_sum) {
    Canvas canvas(height, width, cfg.background);
    if (weight_sum) *weight_sum = ImageBuf(height, width, 1);

    std::vector<StrokeGeom> geoms;
    geoms.reserve(strokes.size());
    for (const auto& s : strokes)
        geoms.push_back(build_stroke_geom(s, cfg, height, width));
    TileGrid grid(height, width, cfg.tile_size, strokes, geoms);

    int ntiles = grid.tx * grid.ty;
    parallel_for(ntiles, cfg.threads, [&](int begin, int end, int) {
        for (int tile = begin; tile < end; ++tile) {
            const auto& order = grid.strokes[tile];
            int px0 = (tile % grid.tx) * grid.ts;
            int py0 = (tile / grid.tx) * grid.ts;
            int px1 = std::min(width, px0 + grid.ts);
            int py1 = std::min(height, py0 + grid.ts);
            for (int y = py0; y < py1; ++y) {
                for (int x = px0; x < px1; ++x) {
                    Vec2 p(x, y);
                    double T = 1.0;
                    Vec3 col = Vec3::Zero();
                    double h = 0.0, wsum = 0.0;
                    for (int i : order) {
                        const auto& g = geoms[i];
                        if (x < g.x0 || x >= g.x1 || y < g.y0 || y >= g.y1)
                            continue;
                        Nearest nb = nearest_segment(g, p);
                        double k =
                            splat_kernel(nb.d, strokes[i].width, cfg.tau).k;
                        if (k <= 0.0) continue;
                        double alpha = strokes[i].opacity * k;
                        double weight = T * alpha;
                        col += weight * strokes[i].color;
                        double hv = strokes[i].height;
                        if (height_eval) {
                            double arc =
                                g.cumlen[nb.seg] +
                                nb.sd.t * (g.cumlen[nb.seg + 1] - g.cumlen[nb.seg]);
                            hv = (*height_eval)(i, x, y, k, arc);
                        }
                        h += weight * hv;
                        wsum += weight;
                        T -= weight;  // keeps sum(weights) + T == 1 exactly
                    }
                    col += T * cfg.background;
                    if (bg_height) h += T * bg_height->at(y, x);
                    for (int c = 0; c < 3; ++c) canvas.color.at(y, x, c) = col[c];
                    canvas.height.at(y, x) = h;
                    canvas.transmittance.at(y, x) = T;
                    if (weight_sum) weight_sum->at(y, x) = wsum;
                }
            }
        }
    });
    return canvas;
}

void composite_front(Canvas& canvas, const Stroke& s, const RenderConfig& cfg) {
    StrokeGeom g =
        build_stroke_geom(s, cfg, canvas.color.height, canvas.color.width);
    if (g.empty) return;
    for (int y = g.y0; y < g.y1; ++y) {
        for (int x = g.x0; x < g.x1; ++x) {
            Nearest nb = nearest_segment(g, Vec2(x, y));
            double k = splat_kernel(nb.d, s.width, cfg.tau).k;
            if (k <= 0.0) continue;
            double alpha = s.opacity * k;
            for (int c = 0; c < 3; ++c)
                canvas.color.at(y, x, c) =
                    alpha * s.color[c] + (1 - alpha) * canvas.color.at(y, x, c);
            canvas.height.at(y, x) =
                alpha * s.height + (1 - alpha) * canvas.height.at(y, x);
            canvas.transmittance.at(y, x) *= (1 - alpha);
        }
    }
}

namespace {

struct PixelEntry {
    int stroke;
    double alpha, T, k, dk_dd, dk_dw;
    int seg;
    SegmentDistance sd;
};

struct Accum {
    std::vector<Vec2> vg;  // per sampled vertex
    Vec3 c = Vec3::Zero();
    double o = 0, w = 0, h = 0;
};

}  // namespace

std::vector<StrokeGrads> render_backward(const StrokeSet& strokes,
                                         const RenderConfig& cfg,
                                         const ImageBuf& grad_color,
                                         const ImageBuf* grad_height) {
    const int height = grad_color.height, width = grad_color.width;
    const int n = static_cast<int>(strokes.size());

    std::vector<StrokeGeom> geoms;
    geoms.reserve(n);
    for (const auto& s : strokes)
        geoms.push_back(build_stroke_geom(s, cfg, height, width));
    TileGrid grid(height, width, cfg.tile_size, strokes, geoms);
    int ntiles = grid.tx * grid.ty;

    int workers = std::max(1, std::min(cfg.threads, ntiles));
    std::vector<std::vector<Accum>> acc(workers);
    for (auto& a : acc) {
        a.resize(n);
        for (int i = 0; i < n; ++i)
            a[i].vg.assign(geoms[i].samples.size(), Vec2::Zero());
    }

    parallel_for(ntiles, workers, [&](int begin, int end, int worker) {
        std::vector<PixelEntry> cover;
        auto& local = acc[worker];
        for (int tile = begin; tile < end; ++tile) {
            const auto& order = grid.strokes[tile];
            if (order.empty()) continue;
            int px0 = (tile % grid.tx) * grid.ts;
            int py0 = (tile / grid.tx) * grid.ts;
            int px1 = std::min(width, px0 + grid.ts);
            int py1 = std::min(height, py0 + grid.ts);
            for (int y = py0; y < py1; ++y) {
                for (int x = px0; x < px1; ++x) {
                    Vec2 p(x, y);
                    cover.clear();
                    double T = 1.0;
                    for (int i : order) {
                        const auto& g = geoms[i];
                        if (x < g.x0 || x >= g.x1 || y < g.y0 || y >= g.y1)
                            continue;
                        Nearest nb = nearest_segment(g, p);
                        KernelValue kv =
                            splat_kernel(nb.d, strokes[i].width, cfg.tau);
                        if (kv.k <= 0.0) continue;  // clamped: zero gradient
                        double alpha = strokes[i].opacity * kv.k;
                        cover.push_back({i, alpha, T, kv.k, kv.dk_dd, kv.dk_dw,
                                         nb.seg, nb.sd});
                        T -= T * alpha;
                    }
                    if (cover.empty()) continue;
                    Vec3 gc(grad_color.at(y, x, 0), grad_color.at(y, x, 1),
                            grad_color.at(y, x, 2));
                    double gh = grad_height ? grad_height->at(y, x) : 0.0;
                    // back-to-front: Rest = everything composited behind
                    Vec3 rest = cfg.background;
                    double rest_h = 0.0;
                    for (int e = static_cast<int>(cover.size()) - 1; e >= 0; --e) {
                        const auto& pe = cover[e];
                        const Stroke& s = strokes[pe.stroke];
                        Accum& a = local[pe.stroke];
                        double weight = pe.T * pe.alpha;
                        a.c += gc * weight;
                        a.h += gh * weight;
                        double g_alpha = pe.T * (gc.dot(s.color - rest) +
                                                 gh * (s.height - rest_h));
                        a.o += g_alpha * pe.k;
                        double g_k = g_alpha * s.opacity;
                        a.w += g_k * pe.dk_dw;
                        double g_d = g_k * pe.dk_dd;
                        a.vg[pe.seg] += g_d * pe.sd.d_a;
                        a.vg[pe.seg + 1] += g_d * pe.sd.d_b;
                        rest = pe.alpha * s.color + (1 - pe.alpha) * rest;
                        rest_h = pe.alpha * s.height + (1 - pe.alpha) * rest_h;
                    }
                }
            }
        }
    });

    // deterministic merge in worker order, then chain vertex gradients
    // through the Bernstein sampling weights
    std::vector<StrokeGrads> grads(n);
    for (int i = 0; i < n; ++i) {
        Accum total;
        total.vg.assign(geoms[i].samples.size(), Vec2::Zero());
        for (int w = 0; w < workers; ++w) {
            const Accum& a = acc[w][i];
            for (size_t m = 0; m < total.vg.size(); ++m) total.vg[m] += a.vg[m];
            total.c += a.c;
            total.o += a.o;
            total.w += a.w;
            total.h += a.h;
        }
        StrokeGrads& g = grads[i];
        g.d_ctrl.assign(strokes[i].chain.ctrl.size(), Vec2::Zero());
        SampleJacobian jac = sample_bezier_jacobian(strokes[i].chain, cfg.n_samples);
        for (size_t m = 0; m < total.vg.size(); ++m)
            for (int k = 0; k < 4; ++k)
                g.d_ctrl[jac.ctrl_base[m] + k] += jac.weights(m, k) * total.vg[m];
        g.d_color = total.c;
        g.d_opacity = total.o;
        g.d_width = total.w;
        g.d_height = total.h;
    }
    return grads;
}

}  // namespace sf
