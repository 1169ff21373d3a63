#pragma once

#include <Eigen/Core>

#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// Dense H x W x C buffer of doubles, row-major, channel-interleaved.
struct ImageBuf {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    ImageBuf() = default;
    ImageBuf(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {}

    double& at(int y, int x, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t size() const { return data.size(); }
    bool same_shape(const ImageBuf& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    // Bilinear sample of channel c at continuous (x, y); clamps to borders.
    double bilinear(double x, double y, int c = 0) const {
        x = std::min(std::max(x, 0.0), static_cast<double>(width - 1));
        y = std::min(std::max(y, 0.0), static_cast<double>(height - 1));
        int x0 = static_cast<int>(x);
        int y0 = static_cast<int>(y);
        int x1 = std::min(x0 + 1, width - 1);
        int y1 = std::min(y0 + 1, height - 1);
        double fx = x - x0, fy = y - y0;
        double a = at(y0, x0, c) * (1 - fx) + at(y0, x1, c) * fx;
        double b = at(y1, x0, c) * (1 - fx) + at(y1, x1, c) * fx;
        return a * (1 - fy) + b * fy;
    }
};

// Rec.709 luma of a linear RGB triple.
inline double luminance(double r, double g, double b) {
    return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

}  // namespace sf
