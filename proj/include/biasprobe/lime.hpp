#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "biasprobe/csv.hpp"
#include "biasprobe/errors.hpp"
#include "biasprobe/image.hpp"
#include "biasprobe/linalg.hpp"
#include "biasprobe/parallel.hpp"
#include "biasprobe/rng.hpp"
#include "biasprobe/slic.hpp"

namespace biasprobe {

/// Black-box model under explanation: image in, real score out.
using Scorer = std::function<double(const Image&)>;

struct Explanation {
    std::vector<double> segment_weights;
    double intercept = 0.0;
    double model_score = 0.0;       // scorer output on the unperturbed image
    std::vector<int> top_segments;  // ordered by |weight|, largest first
    std::vector<char> agreement;    // per segment: weight sign matches model_score sign
};

struct LimeOptions {
    std::size_t n_samples = 5000;
    double kernel_width = 0.25; // exp(-d^2 / w^2), d = cosine distance on masks
    double ridge = 1.0;
    std::size_t top_k = 10;
    std::size_t n_threads = 1; // >1 requires a thread-safe scorer
};

/// Weighted ridge fit of scorer outputs on binary segment masks. Masked-off
/// segments are filled with the image's per-channel mean color. Deterministic
/// given the seed; samples use independent derived streams so the thread count
/// never changes the result.
inline Explanation lime_explain(const Scorer& scorer, const Image& image, const Segmentation& seg,
                                std::uint64_t seed, const LimeOptions& opts = {}) {
    if (seg.width != image.width || seg.height != image.height)
        throw SizeMismatch("lime_explain: segmentation/image size mismatch");
    const std::size_t k = static_cast<std::size_t>(seg.k);
    if (opts.n_samples < k)
        throw InvariantViolation("lime_explain: n_samples must be >= segment count");

    std::array<double, 3> mean_color = {0, 0, 0};
    for (std::size_t p = 0; p < image.pixel_count(); ++p)
        for (int c = 0; c < image.channels; ++c)
            mean_color[static_cast<std::size_t>(c)] +=
                image.pixels[p * static_cast<std::size_t>(image.channels) + static_cast<std::size_t>(c)];
    std::array<std::uint8_t, 3> fill = {0, 0, 0};
    for (int c = 0; c < image.channels; ++c)
        fill[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(
            std::lround(mean_color[static_cast<std::size_t>(c)] / static_cast<double>(image.pixel_count())));

    const std::size_t n = opts.n_samples;
    std::vector<std::vector<char>> masks(n, std::vector<char>(k));
    std::vector<double> scores(n, 0.0), sample_weight(n, 0.0);
    const double w2 = opts.kernel_width * opts.kernel_width;

    std::string first_error;
    std::mutex error_mutex;
    parallel_for(n, opts.n_threads, [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        auto& mask = masks[i];
        std::size_t on = 0;
        for (std::size_t s = 0; s < k; ++s) {
            mask[s] = static_cast<char>(rng() & 1u);
            on += static_cast<std::size_t>(mask[s]);
        }
        Image perturbed = image;
        for (std::size_t p = 0; p < image.pixel_count(); ++p) {
            if (mask[static_cast<std::size_t>(seg.labels[p])]) continue;
            for (int c = 0; c < image.channels; ++c)
                perturbed.pixels[p * static_cast<std::size_t>(image.channels) +
                                 static_cast<std::size_t>(c)] = fill[static_cast<std::size_t>(c)];
        }
        try {
            scores[i] = scorer(perturbed);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (first_error.empty())
                first_error = "sample " + std::to_string(i) + ": " + e.what();
            return;
        }
        // cosine distance between the mask and the all-ones mask
        const double d = 1.0 - std::sqrt(static_cast<double>(on) / static_cast<double>(k));
        sample_weight[i] = std::exp(-d * d / w2);
    });
    if (!first_error.empty()) throw ScorerFailure("lime_explain: scorer failed at " + first_error);

    // weighted ridge with unpenalized intercept: (X'WX + lambda*R) beta = X'Wy
    const std::size_t m = k + 1;
    Matrix gram(m, m);
    Vec rhs(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = sample_weight[i];
        if (w <= 0.0) continue;
        const auto& mask = masks[i];
        const double wy = w * scores[i];
        gram(0, 0) += w;
        rhs[0] += wy;
        for (std::size_t a = 0; a < k; ++a) {
            if (!mask[a]) continue;
            gram(0, a + 1) += w;
            gram(a + 1, 0) += w;
            rhs[a + 1] += wy;
            for (std::size_t b = a; b < k; ++b) {
                if (!mask[b]) continue;
                gram(a + 1, b + 1) += w;
                if (b != a) gram(b + 1, a + 1) += w;
            }
        }
    }
    for (std::size_t a = 1; a < m; ++a) gram(a, a) += opts.ridge;
    Vec beta = cholesky_solve(std::move(gram), std::move(rhs));

    Explanation out;
    out.intercept = beta[0];
    out.segment_weights.assign(beta.begin() + 1, beta.end());
    out.model_score = scorer(image);
    out.top_segments.resize(k);
    std::iota(out.top_segments.begin(), out.top_segments.end(), 0);
    std::sort(out.top_segments.begin(), out.top_segments.end(), [&](int a, int b) {
        const double wa = std::fabs(out.segment_weights[static_cast<std::size_t>(a)]);
        const double wb = std::fabs(out.segment_weights[static_cast<std::size_t>(b)]);
        return wa != wb ? wa > wb : a < b;
    });
    out.top_segments.resize(std::min(opts.top_k, k));
    out.agreement.resize(k);
    for (std::size_t s = 0; s < k; ++s)
        out.agreement[s] =
            static_cast<char>((out.segment_weights[s] >= 0.0) == (out.model_score >= 0.0));
    return out;
}

// ---- aggregation ------------------------------------------------------------

struct ExplainedFace {
    Image image;
    Segmentation seg;
    Explanation expl;
};

struct Heatmap {
    int width = 0, height = 0;
    Vec values;      // mean per-pixel segment weight across faces
    Image mean_face; // pixel-wise average of the input faces
};

/// Rasterize each explanation onto its own segmentation, then average per
/// pixel across the cohort; the mean face is averaged alongside.
inline Heatmap aggregate_heatmap(const std::vector<ExplainedFace>& faces, int width, int height) {
    if (faces.empty()) throw EmptyData("aggregate_heatmap: no explanations");
    const int channels = faces.front().image.channels;
    Heatmap hm;
    hm.width = width;
    hm.height = height;
    hm.values.assign(static_cast<std::size_t>(width) * height, 0.0);
    std::vector<double> face_acc(static_cast<std::size_t>(width) * height * channels, 0.0);
    for (const auto& f : faces) {
        if (f.image.width != width || f.image.height != height || f.image.channels != channels ||
            f.seg.width != width || f.seg.height != height)
            throw SizeMismatch("aggregate_heatmap: face not co-registered to reference size");
        for (std::size_t p = 0; p < hm.values.size(); ++p) {
            hm.values[p] += f.expl.segment_weights[static_cast<std::size_t>(f.seg.labels[p])];
            for (int c = 0; c < channels; ++c)
                face_acc[p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)] +=
                    f.image.pixels[p * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
        }
    }
    const double inv = 1.0 / static_cast<double>(faces.size());
    for (auto& v : hm.values) v *= inv;
    hm.mean_face = Image(width, height, channels);
    for (std::size_t i = 0; i < face_acc.size(); ++i)
        hm.mean_face.pixels[i] = static_cast<std::uint8_t>(std::lround(face_acc[i] * inv));
    return hm;
}

/// Diverging render: positive weights in blue, negative in red, zero white.
inline Image heatmap_to_image(const Heatmap& hm) {
    double vmax = 0.0;
    for (double v : hm.values) vmax = std::max(vmax, std::fabs(v));
    Image img(hm.width, hm.height, 3, 255);
    if (vmax <= 0.0) return img;
    for (std::size_t p = 0; p < hm.values.size(); ++p) {
        const double t = hm.values[p] / vmax; // [-1, 1]
        const auto fade = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - std::fabs(t))));
        if (t >= 0.0) {
            img.pixels[p * 3 + 0] = fade;
            img.pixels[p * 3 + 1] = fade;
            img.pixels[p * 3 + 2] = 255;
        } else {
            img.pixels[p * 3 + 0] = 255;
            img.pixels[p * 3 + 1] = fade;
            img.pixels[p * 3 + 2] = fade;
        }
    }
    return img;
}

inline void save_heatmap_csv(const std::string& path, const Heatmap& hm) {
    csv::Writer w(path);
    w.row({"x", "y", "value"});
    for (int y = 0; y < hm.height; ++y)
        for (int x = 0; x < hm.width; ++x)
            w.row({std::to_string(x), std::to_string(y),
                   csv::format_double(hm.values[static_cast<std::size_t>(y) * hm.width + x])});
}

} // namespace biasprobe
