#include "crisis/mixup.hpp"

#include "crisis/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crisis {

MixedPair mixup(const FeatureVector& xa, const LabelDistribution& ya, const FeatureVector& xb,
                const LabelDistribution& yb, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("mixup lambda must lie in [0,1]");
    if (xa.dim != xb.dim) throw Error("mixup: feature dims differ");
    if (ya.size() != yb.size()) throw Error("mixup: label distributions differ in size");
    if (lambda == 1.0) return {xa, ya};
    if (lambda == 0.0) return {xb, yb};

    const double mu = 1.0 - lambda;
    MixedPair out;
    out.x.dim = xa.dim;
    out.x.entries.reserve(xa.entries.size() + xb.entries.size());
    auto ia = xa.entries.begin();
    auto ib = xb.entries.begin();
    auto emit = [&](std::uint32_t idx, double v) {
        if (v != 0.0) out.x.entries.emplace_back(idx, v);
    };
    while (ia != xa.entries.end() || ib != xb.entries.end()) {
        if (ib == xb.entries.end() || (ia != xa.entries.end() && ia->first < ib->first)) {
            emit(ia->first, lambda * ia->second);
            ++ia;
        } else if (ia == xa.entries.end() || ib->first < ia->first) {
            emit(ib->first, mu * ib->second);
            ++ib;
        } else {
            emit(ia->first, lambda * ia->second + mu * ib->second);
            ++ia;
            ++ib;
        }
    }

    out.y.probs.resize(ya.size());
    double s = 0.0;
    for (std::size_t c = 0; c < ya.size(); ++c) {
        out.y.probs[c] = lambda * ya.probs[c] + mu * yb.probs[c];
        s += out.y.probs[c];
    }
    if (s > 0.0) {
        for (auto& p : out.y.probs) p /= s;
    }
    return out;
}

double draw_mix_lambda(Rng& rng, double alpha) {
    if (!(alpha > 0.0)) throw ConfigError("mixup alpha must be > 0");
    const double lambda = rng.beta(alpha, alpha);
    return std::max(lambda, 1.0 - lambda);
}

double confidence_gap(const LabelDistribution& probs) {
    if (probs.size() < 2) throw Error("confidence_gap requires at least 2 classes");
    double top1 = -std::numeric_limits<double>::infinity(), top2 = top1;
    for (double p : probs.probs) {
        if (p > top1) {
            top2 = top1;
            top1 = p;
        } else if (p > top2) {
            top2 = p;
        }
    }
    return top1 - top2;
}

LabelDistribution sharpen(const LabelDistribution& probs, double temperature) {
    if (!(temperature > 0.0)) throw Error("sharpen temperature must be > 0");
    if (temperature == 1.0) return probs;
    const double inv_t = 1.0 / temperature;
    double max_log = -std::numeric_limits<double>::infinity();
    for (double p : probs.probs) {
        if (p > 0.0) max_log = std::max(max_log, std::log(p) * inv_t);
    }
    LabelDistribution out;
    out.probs.resize(probs.size(), 0.0);
    double s = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        if (probs.probs[c] > 0.0) {
            out.probs[c] = std::exp(std::log(probs.probs[c]) * inv_t - max_log);
            s += out.probs[c];
        }
    }
    if (s > 0.0) {
        for (auto& p : out.probs) p /= s;
    }
    return out;
}

FeatureVector augment_features(const FeatureVector& x, double drop, Rng& rng) {
    if (!(drop >= 0.0 && drop < 1.0)) throw ConfigError("augmentation drop rate must lie in [0,1)");
    if (drop == 0.0) return x;
    FeatureVector out;
    out.dim = x.dim;
    const double scale = 1.0 / (1.0 - drop);
    for (const auto& [i, w] : x.entries) {
        if (!rng.bernoulli(drop)) out.entries.emplace_back(i, w * scale);
    }
    return out;
}

}  // namespace crisis
