#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "biasprobe/errors.hpp"
#include "biasprobe/image.hpp"

namespace biasprobe {

/// Per-pixel superpixel labels in [0, k).
struct Segmentation {
    int width = 0, height = 0;
    int k = 0;
    std::vector<int> labels;

    int label_at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

namespace slic_detail {

// sRGB -> CIELAB (D65); grayscale maps intensity onto the L axis so one
// compactness scale works for both.
inline std::array<double, 3> pixel_color(const Image& img, int x, int y) {
    if (img.channels == 1) return {img.at(x, y) * 100.0 / 255.0, 0.0, 0.0};
    auto lin = [](double c) {
        c /= 255.0;
        return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    };
    const double r = lin(img.at(x, y, 0)), g = lin(img.at(x, y, 1)), b = lin(img.at(x, y, 2));
    double X = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
    double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    double Z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
    auto f = [](double t) {
        return t > 0.008856 ? std::cbrt(t) : 7.787 * t + 16.0 / 116.0;
    };
    const double fx = f(X), fy = f(Y), fz = f(Z);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

struct Center {
    double l = 0, a = 0, b = 0, x = 0, y = 0;
};

} // namespace slic_detail

/// Simple Linear Iterative Clustering: grid-initialized centers, iterative
/// assignment in combined color+position distance, then a connectivity pass
/// that absorbs fragments smaller than a quarter of the expected segment area.
inline Segmentation slic(const Image& img, int k = 300, double compactness = 10.0, int iters = 10) {
    const std::size_t n = img.pixel_count();
    if (k < 1) throw InvariantViolation("slic: k must be >= 1");
    if (static_cast<std::size_t>(k) > n)
        throw TooManySegments("slic: requested " + std::to_string(k) + " segments for " +
                              std::to_string(n) + " pixels");

    std::vector<std::array<double, 3>> lab(n);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            lab[static_cast<std::size_t>(y) * img.width + x] = slic_detail::pixel_color(img, x, y);

    const double step = std::sqrt(static_cast<double>(n) / k);
    int nx = std::max(1, static_cast<int>(std::lround(img.width / step)));
    int ny = std::max(1, static_cast<int>(std::lround(static_cast<double>(k) / nx)));
    // nx*ny approximates k; never start below k or above the pixel count
    while (static_cast<long>(nx) * ny < k) ++ny;
    while (static_cast<long>(nx) * ny > static_cast<long>(n)) (nx > ny ? nx : ny) -= 1;

    auto grad = [&](int x, int y) {
        auto c = [&](int xx, int yy) {
            xx = std::clamp(xx, 0, img.width - 1);
            yy = std::clamp(yy, 0, img.height - 1);
            return lab[static_cast<std::size_t>(yy) * img.width + xx];
        };
        double g = 0.0;
        const auto xp = c(x + 1, y), xm = c(x - 1, y), yp = c(x, y + 1), ym = c(x, y - 1);
        for (int i = 0; i < 3; ++i)
            g += (xp[i] - xm[i]) * (xp[i] - xm[i]) + (yp[i] - ym[i]) * (yp[i] - ym[i]);
        return g;
    };

    std::vector<slic_detail::Center> centers;
    centers.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int cx = static_cast<int>((i + 0.5) * img.width / nx);
            int cy = static_cast<int>((j + 0.5) * img.height / ny);
            cx = std::clamp(cx, 0, img.width - 1);
            cy = std::clamp(cy, 0, img.height - 1);
            // shift to the lowest-gradient pixel in a 3x3 neighborhood
            int bx = cx, by = cy;
            double bg = grad(cx, cy);
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int px = std::clamp(cx + dx, 0, img.width - 1);
                    const int py = std::clamp(cy + dy, 0, img.height - 1);
                    const double g = grad(px, py);
                    if (g < bg) {
                        bg = g;
                        bx = px;
                        by = py;
                    }
                }
            const auto& c = lab[static_cast<std::size_t>(by) * img.width + bx];
            centers.push_back({c[0], c[1], c[2], static_cast<double>(bx), static_cast<double>(by)});
        }
    }

    const double inv_s2 = compactness * compactness / (step * step);
    std::vector<int> labels(n, -1);
    std::vector<double> best(n, std::numeric_limits<double>::max());
    const int win = std::max(2, static_cast<int>(std::lround(2.0 * step)));
    for (int it = 0; it < iters; ++it) {
        std::fill(best.begin(), best.end(), std::numeric_limits<double>::max());
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const auto& ct = centers[c];
            const int x0 = std::max(0, static_cast<int>(ct.x) - win);
            const int x1 = std::min(img.width - 1, static_cast<int>(ct.x) + win);
            const int y0 = std::max(0, static_cast<int>(ct.y) - win);
            const int y1 = std::min(img.height - 1, static_cast<int>(ct.y) + win);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * img.width + x;
                    const auto& col = lab[p];
                    const double dl = col[0] - ct.l, da = col[1] - ct.a, db = col[2] - ct.b;
                    const double dx = x - ct.x, dy = y - ct.y;
                    const double d = dl * dl + da * da + db * db + (dx * dx + dy * dy) * inv_s2;
                    if (d < best[p]) {
                        best[p] = d;
                        labels[p] = static_cast<int>(c);
                    }
                }
            }
        }
        // recompute centers
        std::vector<slic_detail::Center> acc(centers.size());
        std::vector<std::size_t> counts(centers.size(), 0);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * img.width + x;
                if (labels[p] < 0) continue;
                auto& a = acc[static_cast<std::size_t>(labels[p])];
                const auto& col = lab[p];
                a.l += col[0];
                a.a += col[1];
                a.b += col[2];
                a.x += x;
                a.y += y;
                ++counts[static_cast<std::size_t>(labels[p])];
            }
        for (std::size_t c = 0; c < centers.size(); ++c) {
            if (counts[c] == 0) continue;
            const double inv = 1.0 / static_cast<double>(counts[c]);
            centers[c] = {acc[c].l * inv, acc[c].a * inv, acc[c].b * inv, acc[c].x * inv,
                          acc[c].y * inv};
        }
    }

    // orphans outside every search window attach to the nearest center
    for (std::size_t p = 0; p < n; ++p) {
        if (labels[p] >= 0) continue;
        const int x = static_cast<int>(p) % img.width, y = static_cast<int>(p) / img.width;
        double bd = std::numeric_limits<double>::max();
        for (std::size_t c = 0; c < centers.size(); ++c) {
            const double dx = x - centers[c].x, dy = y - centers[c].y;
            const double d = dx * dx + dy * dy;
            if (d < bd) {
                bd = d;
                labels[p] = static_cast<int>(c);
            }
        }
    }

    // connectivity enforcement: flood-fill 4-connected components in scan
    // order; fragments below min_size are absorbed by the preceding neighbor
    const std::size_t min_size = std::max<std::size_t>(1, n / static_cast<std::size_t>(k) / 4);
    std::vector<int> final_labels(n, -1);
    std::vector<std::size_t> stack;
    int next_label = 0;
    const int dx4[] = {1, -1, 0, 0};
    const int dy4[] = {0, 0, 1, -1};
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (final_labels[seed] >= 0) continue;
        int adjacent = -1;
        stack.assign(1, seed);
        std::vector<std::size_t> component;
        final_labels[seed] = next_label;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            component.push_back(p);
            const int x = static_cast<int>(p) % img.width, y = static_cast<int>(p) / img.width;
            for (int d = 0; d < 4; ++d) {
                const int xx = x + dx4[d], yy = y + dy4[d];
                if (xx < 0 || xx >= img.width || yy < 0 || yy >= img.height) continue;
                const std::size_t q = static_cast<std::size_t>(yy) * img.width + xx;
                if (final_labels[q] < 0 && labels[q] == labels[seed]) {
                    final_labels[q] = next_label;
                    stack.push_back(q);
                } else if (final_labels[q] >= 0 && final_labels[q] != next_label) {
                    adjacent = final_labels[q];
                }
            }
        }
        if (component.size() < min_size && adjacent >= 0) {
            for (std::size_t p : component) final_labels[p] = adjacent;
        } else {
            ++next_label;
        }
    }

    Segmentation seg;
    seg.width = img.width;
    seg.height = img.height;
    seg.k = next_label;
    seg.labels = std::move(final_labels);
    return seg;
}

} // namespace biasprobe
