#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "uavdet/morphology.hpp"
#include "uavdet/rng.hpp"

using namespace uavdet;
using namespace uavdet::tf;

namespace {

TFImage random_image(int rows, int cols, CounterRng& rng) {
    TFImage img(rows, cols);
    for (double& v : img.values) v = rng.uniform();
    return img;
}

BinaryImage random_binary(int rows, int cols, CounterRng& rng, double p = 0.5) {
    BinaryImage img(rows, cols);
    for (auto& b : img.bits) b = rng.uniform() < p ? 1 : 0;
    return img;
}

// Brute-force oracles, coded from the definitions independently of the library.

TFImage median_oracle(const TFImage& img, int k) {
    TFImage out = img;
    const int h = k / 2;
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            std::vector<double> vals;
            for (int dr = -h; dr <= h; ++dr) {
                for (int dc = -h; dc <= h; ++dc) {
                    const int rr = std::min(std::max(r + dr, 0), img.rows - 1);
                    const int cc = std::min(std::max(c + dc, 0), img.cols - 1);
                    vals.push_back(img.at(rr, cc));
                }
            }
            std::sort(vals.begin(), vals.end());
            out.at(r, c) = vals[vals.size() / 2];
        }
    }
    return out;
}

BinaryImage erode_oracle(const BinaryImage& img, const StructuringElement& se) {
    BinaryImage out(img.rows, img.cols);
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            bool all = true;
            for (int i = 0; i < se.rows; ++i) {
                for (int j = 0; j < se.cols; ++j) {
                    if (!se.at(i, j)) continue;
                    const int rr = r + i - se.anchor_r, cc = c + j - se.anchor_c;
                    const bool inside = rr >= 0 && rr < img.rows && cc >= 0 && cc < img.cols;
                    if (!inside || !img.at(rr, cc)) all = false;
                }
            }
            out.at(r, c) = all ? 1 : 0;
        }
    }
    return out;
}

BinaryImage dilate_oracle(const BinaryImage& img, const StructuringElement& se) {
    BinaryImage out(img.rows, img.cols);
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            bool any = false;
            for (int i = 0; i < se.rows; ++i) {
                for (int j = 0; j < se.cols; ++j) {
                    if (!se.at(i, j)) continue;
                    const int rr = r + i - se.anchor_r, cc = c + j - se.anchor_c;
                    if (rr >= 0 && rr < img.rows && cc >= 0 && cc < img.cols && img.at(rr, cc)) {
                        any = true;
                    }
                }
            }
            out.at(r, c) = any ? 1 : 0;
        }
    }
    return out;
}

// Exhaustive Otsu: recompute the between-class variance from the histogram for
// every candidate threshold.
int otsu_oracle_bin(const TFImage& img) {
    double lo = img.values[0], hi = img.values[0];
    for (double v : img.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<long> hist(256, 0);
    for (double v : img.values) {
        ++hist[std::min(255, static_cast<int>((v - lo) / (hi - lo) * 256.0))];
    }
    int best_t = 0;
    double best = -1.0;
    for (int t = 0; t < 255; ++t) {
        double w0 = 0.0, w1 = 0.0, s0 = 0.0, s1 = 0.0;
        for (int b = 0; b <= t; ++b) {
            w0 += hist[b];
            s0 += static_cast<double>(b) * hist[b];
        }
        for (int b = t + 1; b < 256; ++b) {
            w1 += hist[b];
            s1 += static_cast<double>(b) * hist[b];
        }
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double d = s0 / w0 - s1 / w1;
        const double var = w0 * w1 * d * d;
        if (var > best) {
            best = var;
            best_t = t;
        }
    }
    return best_t;
}

} // namespace

TEST_CASE("median filter") {
    CounterRng rng(11, 0);
    const auto img = random_image(8, 8, rng);
    CHECK(median_filter(img, 1).values == img.values);

    // Lone impulse in a flat field disappears.
    TFImage flat(7, 7);
    for (double& v : flat.values) v = 1.0;
    flat.at(3, 3) = 50.0;
    const auto cleaned = median_filter(flat, 3);
    for (double v : cleaned.values) CHECK(v == 1.0);

    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_image(8, 8, rng);
        CHECK(median_filter(x, 3).values == median_oracle(x, 3).values);
        CHECK(median_filter(x, 5).values == median_oracle(x, 5).values);
    }

    CHECK_THROWS_AS(median_filter(img, 2), ParamError);
}

TEST_CASE("otsu binarization") {
    // Two-level image: exact partition back.
    CounterRng rng(12, 0);
    TFImage two(8, 8);
    for (double& v : two.values) v = rng.uniform() < 0.4 ? 0.1 : 0.9;
    const auto res = binarize(two);
    CHECK(!res.degenerate);
    CHECK(res.threshold > 0.1);
    CHECK(res.threshold <= 0.9);
    for (size_t i = 0; i < two.values.size(); ++i) {
        CHECK(res.image.bits[i] == (two.values[i] > 0.5 ? 1 : 0));
    }

    TFImage constant(4, 4);
    for (double& v : constant.values) v = 2.0;
    const auto deg = binarize(constant);
    CHECK(deg.degenerate);
    for (auto b : deg.image.bits) CHECK(b == 0);

    // Random bimodal mixtures match the exhaustive sweep.
    for (int trial = 0; trial < 30; ++trial) {
        TFImage x(12, 12);
        for (double& v : x.values) {
            v = rng.uniform() < 0.5 ? 0.2 + 0.1 * rng.uniform() : 0.7 + 0.2 * rng.uniform();
        }
        const int want_bin = otsu_oracle_bin(x);
        double lo = x.values[0], hi = x.values[0];
        for (double v : x.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const auto got = binarize(x);
        for (size_t i = 0; i < x.values.size(); ++i) {
            const int b = std::min(255, static_cast<int>((x.values[i] - lo) / (hi - lo) * 256.0));
            CHECK(got.image.bits[i] == (b > want_bin ? 1 : 0));
        }
    }
}

TEST_CASE("erode and dilate") {
    const auto se = StructuringElement::solid(3, 3);

    BinaryImage zero(6, 6);
    CHECK(erode(zero, se).bits == zero.bits);
    CHECK(dilate(zero, se).bits == zero.bits);

    // 3x3 solid image: erode leaves the center; dilating that restores it.
    BinaryImage solid(3, 3);
    for (auto& b : solid.bits) b = 1;
    const auto eroded = erode(solid, se);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) CHECK(eroded.at(r, c) == (r == 1 && c == 1 ? 1 : 0));
    }
    CHECK(dilate(eroded, se).bits == solid.bits);

    CounterRng rng(13, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_binary(16, 16, rng);
        CHECK(erode(x, se).bits == erode_oracle(x, se).bits);
        CHECK(dilate(x, se).bits == dilate_oracle(x, se).bits);
    }

    // Asymmetric element against the oracle too.
    StructuringElement ell;
    ell.rows = 2;
    ell.cols = 3;
    ell.anchor_r = 0;
    ell.anchor_c = 1;
    ell.bits = {1, 1, 0, 0, 1, 1};
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = random_binary(10, 10, rng);
        CHECK(erode(x, ell).bits == erode_oracle(x, ell).bits);
        CHECK(dilate(x, ell).bits == dilate_oracle(x, ell).bits);
    }

    StructuringElement bad;
    CHECK_THROWS_AS(erode(zero, bad), ParamError);
}

TEST_CASE("erode/dilate duality away from the border") {
    // Zero padding is self-consistent but not self-dual, so the classical
    // complement identity holds wherever the window stays inside the image.
    const auto se = StructuringElement::solid(3, 3);
    CounterRng rng(14, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = random_binary(12, 12, rng);
        BinaryImage not_x = x;
        for (auto& b : not_x.bits) b = b ? 0 : 1;
        const auto lhs = dilate(x, se);
        const auto rhs = erode(not_x, se); // symmetric SE == its reflection
        for (int r = 1; r < 11; ++r) {
            for (int c = 1; c < 11; ++c) {
                CHECK(lhs.at(r, c) == (rhs.at(r, c) ? 0 : 1));
            }
        }
    }
}

TEST_CASE("morphological opening") {
    const auto se = StructuringElement::solid(3, 3);

    // Lone speckle removed.
    BinaryImage speck(8, 8);
    speck.at(4, 4) = 1;
    const auto opened = morph_open(speck, se, se);
    for (auto b : opened.bits) CHECK(b == 0);

    // 2-wide line suppressed, 3-wide preserved away from the ends.
    BinaryImage thin(8, 16);
    for (int r = 3; r < 5; ++r) {
        for (int c = 0; c < 16; ++c) thin.at(r, c) = 1;
    }
    const auto thin_open = morph_open(thin, se, se);
    for (auto b : thin_open.bits) CHECK(b == 0);

    BinaryImage wide(9, 16);
    for (int r = 3; r < 6; ++r) {
        for (int c = 0; c < 16; ++c) wide.at(r, c) = 1;
    }
    const auto wide_open = morph_open(wide, se, se);
    for (int r = 3; r < 6; ++r) {
        for (int c = 2; c < 14; ++c) CHECK(wide_open.at(r, c) == 1);
    }

    CounterRng rng(15, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = random_binary(16, 16, rng, 0.6);
        const auto once = morph_open(x, se, se);
        // Anti-extensive and idempotent.
        for (size_t i = 0; i < x.bits.size(); ++i) CHECK(once.bits[i] <= x.bits[i]);
        CHECK(morph_open(once, se, se).bits == once.bits);
        // Composition against the oracles.
        CHECK(once.bits == dilate_oracle(erode_oracle(x, se), se).bits);
    }
}
