#include "strokeforge/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace sf {

double Polyline::length() const {
    double len = 0;
    for (size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
    return len;
}

static Vec2 bezier3_eval(const Vec2& c0, const Vec2& c1, const Vec2& c2,
                         const Vec2& c3, double t) {
    double s = 1.0 - t;
    double b0 = s * s * s;
    double b1 = 3.0 * s * s * t;
    double b2 = 3.0 * s * t * t;
    double b3 = t * t * t;
    return b0 * c0 + b1 * c1 + b2 * c2 + b3 * c3;
}

Vec2 BezierChain::eval_segment(int s, double t) const {
    const int b = 3 * s;
    return bezier3_eval(ctrl[b], ctrl[b + 1], ctrl[b + 2], ctrl[b + 3], t);
}

Vec2 BezierChain::eval(double u) const {
    const int S = segment_count();
    double g = u * S;
    int s = std::min(static_cast<int>(g), S - 1);
    return eval_segment(s, g - s);
}

std::vector<double> chord_length_params(const Polyline& poly) {
    if (poly.size() < 2) throw std::runtime_error("degenerate-polyline");
    std::vector<double> cum(poly.size(), 0.0);
    for (size_t i = 1; i < poly.size(); ++i)
        cum[i] = cum[i - 1] + (poly.pts[i] - poly.pts[i - 1]).norm();
    double total = cum.back();
    if (!(total > 0.0)) throw std::runtime_error("degenerate-polyline");
    for (auto& t : cum) t /= total;
    cum.front() = 0.0;
    cum.back() = 1.0;
    return cum;
}

Eigen::MatrixXd bernstein_matrix(const std::vector<double>& params, int degree) {
    const int M = static_cast<int>(params.size());
    const int K = degree + 1;
    Eigen::MatrixXd B(M, K);
    // binomial coefficients C(degree, k)
    std::vector<double> binom(K, 1.0);
    for (int k = 1; k < K; ++k) binom[k] = binom[k - 1] * (degree - k + 1) / k;
    for (int m = 0; m < M; ++m) {
        double t = params[m];
        double s = 1.0 - t;
        // powers accumulated to keep endpoint rows exact
        std::vector<double> tp(K, 1.0), sp(K, 1.0);
        for (int k = 1; k < K; ++k) {
            tp[k] = tp[k - 1] * t;
            sp[k] = sp[k - 1] * s;
        }
        for (int k = 0; k < K; ++k) B(m, k) = binom[k] * tp[k] * sp[degree - k];
    }
    return B;
}

Polyline collapse_duplicates(const Polyline& poly) {
    Polyline out;
    for (const auto& p : poly.pts) {
        if (out.pts.empty() || (p - out.pts.back()).squaredNorm() > 0.0)
            out.pts.push_back(p);
    }
    return out;
}

BezierChain catmull_rom_chain(const Polyline& poly) {
    const auto& p = poly.pts;
    const int M = static_cast<int>(p.size());
    if (M < 2) throw std::runtime_error("degenerate-polyline");
    std::vector<Vec2> tan(M);
    tan[0] = p[1] - p[0];
    tan[M - 1] = p[M - 1] - p[M - 2];
    for (int i = 1; i < M - 1; ++i) tan[i] = 0.5 * (p[i + 1] - p[i - 1]);
    BezierChain chain;
    chain.ctrl.push_back(p[0]);
    for (int i = 0; i + 1 < M; ++i) {
        chain.ctrl.push_back(p[i] + tan[i] / 3.0);
        chain.ctrl.push_back(p[i + 1] - tan[i + 1] / 3.0);
        chain.ctrl.push_back(p[i + 1]);
    }
    return chain;
}

// Normal-equation solve for one cubic segment; eigendecomposition
// pseudoinverse when B^T B is near-singular.
static Eigen::Matrix<double, 4, 2> solve_segment(const Eigen::MatrixXd& B,
                                                 const Eigen::MatrixXd& P) {
    Eigen::Matrix4d BtB = B.transpose() * B;
    Eigen::Matrix<double, 4, 2> BtP = B.transpose() * P;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(BtB);
    const auto& ev = es.eigenvalues();
    double emax = ev.maxCoeff();
    if (!(emax > 0.0)) throw std::runtime_error("fit-singular");
    if (ev.minCoeff() >= 1e-10 * emax) {
        return BtB.ldlt().solve(BtP);
    }
    Eigen::Vector4d inv;
    for (int i = 0; i < 4; ++i)
        inv[i] = ev[i] > 1e-10 * emax ? 1.0 / ev[i] : 0.0;
    return es.eigenvectors() * inv.asDiagonal() *
           es.eigenvectors().transpose() * BtP;
}

BezierChain fit_bezier(const Polyline& raw) {
    Polyline poly = collapse_duplicates(raw);
    const int M = static_cast<int>(poly.size());
    if (M < 2) throw std::runtime_error("degenerate-polyline");
    if (M <= 4) return catmull_rom_chain(poly);

    std::vector<double> t = chord_length_params(poly);
    const int edges = M - 1;
    const int n_seg = (edges + 5) / 6;

    // vertex index boundaries, edges spread as evenly as possible
    std::vector<int> bnd(n_seg + 1);
    for (int s = 0; s <= n_seg; ++s)
        bnd[s] = static_cast<int>(std::lround(static_cast<double>(s) * edges / n_seg));

    std::vector<Eigen::Matrix<double, 4, 2>> segs(n_seg);
    for (int s = 0; s < n_seg; ++s) {
        int i0 = bnd[s], i1 = bnd[s + 1];
        int m = i1 - i0 + 1;
        double t0 = t[i0], t1 = t[i1];
        std::vector<double> local(m);
        for (int i = 0; i < m; ++i) local[i] = (t[i0 + i] - t0) / (t1 - t0);
        local.front() = 0.0;
        local.back() = 1.0;
        Eigen::MatrixXd B = bernstein_matrix(local, 3);
        Eigen::MatrixXd P(m, 2);
        for (int i = 0; i < m; ++i) P.row(i) = poly.pts[i0 + i].transpose();
        segs[s] = solve_segment(B, P);
    }

    BezierChain chain;
    chain.ctrl.push_back(segs[0].row(0).transpose());
    for (int s = 0; s < n_seg; ++s) {
        chain.ctrl.push_back(segs[s].row(1).transpose());
        chain.ctrl.push_back(segs[s].row(2).transpose());
        if (s + 1 < n_seg) {
            // average the shared boundary point for C0 continuity
            Vec2 shared = 0.5 * (segs[s].row(3) + segs[s + 1].row(0)).transpose();
            chain.ctrl.push_back(shared);
        } else {
            chain.ctrl.push_back(segs[s].row(3).transpose());
        }
    }
    return chain;
}

Polyline sample_bezier(const BezierChain& chain, int n_samples) {
    Polyline out;
    out.pts.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i)
        out.pts.push_back(chain.eval(static_cast<double>(i) / (n_samples - 1)));
    return out;
}

SampleJacobian sample_bezier_jacobian(const BezierChain& chain, int n_samples) {
    const int S = chain.segment_count();
    SampleJacobian jac;
    jac.ctrl_base.resize(n_samples);
    jac.weights.resize(n_samples, 4);
    for (int i = 0; i < n_samples; ++i) {
        double g = static_cast<double>(i) / (n_samples - 1) * S;
        int s = std::min(static_cast<int>(g), S - 1);
        double t = g - s, u = 1.0 - t;
        jac.ctrl_base[i] = 3 * s;
        jac.weights(i, 0) = u * u * u;
        jac.weights(i, 1) = 3.0 * u * u * t;
        jac.weights(i, 2) = 3.0 * u * t * t;
        jac.weights(i, 3) = t * t * t;
    }
    return jac;
}

double chamfer_distance(const Polyline& a, const Polyline& b) {
    if (a.pts.empty() || b.pts.empty())
        throw std::runtime_error("degenerate-polyline");
    auto one_way = [](const Polyline& from, const Polyline& to) {
        double sum = 0;
        for (const auto& p : from.pts) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to.pts)
                best = std::min(best, (p - q).norm());
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };
    return 0.5 * (one_way(a, b) + one_way(b, a));
}

}  // namespace sf
