#include "crisis/error.hpp"
#include "crisis/mixup.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

using namespace crisis;

namespace {

FeatureVector fv(std::size_t dim, std::vector<std::pair<std::uint32_t, double>> e) {
    FeatureVector x;
    x.dim = dim;
    x.entries = std::move(e);
    return x;
}

}  // namespace

TEST(Mixup, EndpointsReturnParents) {
    const auto xa = fv(8, {{1, 0.6}, {3, 0.8}});
    const auto xb = fv(8, {{2, 1.0}});
    const auto ya = LabelDistribution::one_hot(0, 3), yb = LabelDistribution::one_hot(2, 3);
    const auto one = mixup(xa, ya, xb, yb, 1.0);
    EXPECT_EQ(one.x, xa);
    EXPECT_EQ(one.y, ya);
    const auto zero = mixup(xa, ya, xb, yb, 0.0);
    EXPECT_EQ(zero.x, xb);
    EXPECT_EQ(zero.y, yb);
}

TEST(Mixup, HalfOfTwoOneHots) {
    const auto r = mixup(fv(4, {{0, 1.0}}), LabelDistribution::one_hot(0, 4), fv(4, {{1, 1.0}}),
                         LabelDistribution::one_hot(1, 4), 0.5);
    EXPECT_EQ(r.y.probs, (std::vector<double>{0.5, 0.5, 0.0, 0.0}));
    EXPECT_EQ(r.x.entries, (std::vector<std::pair<std::uint32_t, double>>{{0, 0.5}, {1, 0.5}}));
}

TEST(Mixup, ConvexPerCoordinate) {
    Rng rng(2);
    for (int t = 0; t < 500; ++t) {
        FeatureVector a, b;
        a.dim = b.dim = 32;
        for (std::uint32_t i = 0; i < 32; ++i) {
            if (rng.bernoulli(0.3)) a.entries.emplace_back(i, rng.uniform() * 2 - 1);
            if (rng.bernoulli(0.3)) b.entries.emplace_back(i, rng.uniform() * 2 - 1);
        }
        const double lambda = rng.uniform();
        const auto m = mixup(a, LabelDistribution::uniform(3), b, LabelDistribution::one_hot(1, 3), lambda);
        std::map<std::uint32_t, double> va, vb, vm;
        for (const auto& [i, v] : a.entries) va[i] = v;
        for (const auto& [i, v] : b.entries) vb[i] = v;
        for (const auto& [i, v] : m.x.entries) vm[i] = v;
        for (std::uint32_t i = 0; i < 32; ++i) {
            const double lo = std::min(va[i], vb[i]), hi = std::max(va[i], vb[i]);
            EXPECT_GE(vm[i], lo - 1e-15);
            EXPECT_LE(vm[i], hi + 1e-15);
        }
        m.y.validate();
    }
}

TEST(Mixup, RejectsMismatch) {
    const auto y = LabelDistribution::one_hot(0, 2);
    EXPECT_THROW(mixup(fv(4, {}), y, fv(8, {}), y, 0.5), Error);
    EXPECT_THROW(mixup(fv(4, {}), y, fv(4, {}), LabelDistribution::one_hot(0, 3), 0.5), Error);
    EXPECT_THROW(mixup(fv(4, {}), y, fv(4, {}), y, 1.5), Error);
}

TEST(Mixup, LambdaFoldedAboveHalf) {
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        const double l = draw_mix_lambda(rng, 0.75);
        EXPECT_GE(l, 0.5);
        EXPECT_LE(l, 1.0);
    }
}

TEST(Gap, Examples) {
    EXPECT_NEAR(confidence_gap(LabelDistribution{{0.7, 0.2, 0.1}}), 0.5, 1e-12);
    EXPECT_EQ(confidence_gap(LabelDistribution::uniform(5)), 0.0);
    EXPECT_EQ(confidence_gap(LabelDistribution::one_hot(2, 4)), 1.0);
}

TEST(Gap, RangeAndOneIffOneHot) {
    Rng rng(6);
    for (int t = 0; t < 2000; ++t) {
        LabelDistribution d;
        d.probs.resize(2 + rng.below(6));
        double s = 0;
        for (auto& p : d.probs) s += p = rng.bernoulli(0.2) ? 0.0 : rng.uniform();
        if (s == 0) continue;
        for (auto& p : d.probs) p /= s;
        const double g = confidence_gap(d);
        EXPECT_GE(g, 0.0);
        EXPECT_LE(g, 1.0);
        const bool one_hot = std::count(d.probs.begin(), d.probs.end(), 0.0) ==
                             static_cast<std::ptrdiff_t>(d.probs.size() - 1);
        EXPECT_EQ(g == 1.0, one_hot);
    }
}

TEST(Sharpen, Examples) {
    const LabelDistribution p{{0.5, 0.3, 0.2}};
    EXPECT_EQ(sharpen(p, 1.0), p);
    const auto s = sharpen(p, 0.5);
    EXPECT_NEAR(s.probs[0], 0.658, 1e-3);
    EXPECT_NEAR(s.probs[1], 0.237, 1e-3);
    EXPECT_NEAR(s.probs[2], 0.105, 1e-3);
    const auto cold = sharpen(LabelDistribution{{0.6, 0.4}}, 0.01);
    EXPECT_GT(cold.probs[0], 1 - 1e-12);
    EXPECT_THROW(sharpen(p, 0.0), Error);
}

TEST(Augment, DropsAndRescales) {
    Rng rng(1);
    EXPECT_EQ(augment_features(fv(4, {{0, 0.5}, {2, 0.5}}), 0.0, rng), fv(4, {{0, 0.5}, {2, 0.5}}));
    FeatureVector x;
    x.dim = 1000;
    for (std::uint32_t i = 0; i < 1000; ++i) x.entries.emplace_back(i, 1.0);
    const auto a = augment_features(x, 0.25, rng);
    EXPECT_NEAR(static_cast<double>(a.entries.size()), 750.0, 60.0);
    for (const auto& [i, v] : a.entries) EXPECT_DOUBLE_EQ(v, 1.0 / 0.75);
}
