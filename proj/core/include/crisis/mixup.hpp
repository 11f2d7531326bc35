#pragma once

#include "crisis/featurizer.hpp"
#include "crisis/model.hpp"
#include "crisis/rng.hpp"

#include <utility>

namespace crisis {

struct MixedPair {
    FeatureVector x;
    LabelDistribution y;
};

/// x' = lambda*x_a + (1-lambda)*x_b and likewise for labels (renormalized).
/// lambda == 1 and lambda == 0 return the corresponding parent unchanged.
MixedPair mixup(const FeatureVector& xa, const LabelDistribution& ya, const FeatureVector& xb,
                const LabelDistribution& yb, double lambda);

// lambda ~ Beta(alpha, alpha), folded to max(lambda, 1 - lambda).
double draw_mix_lambda(Rng& rng, double alpha);

// Top-1 minus top-2 probability.
double confidence_gap(const LabelDistribution& probs);

// p_i^(1/T) / sum_j p_j^(1/T).
LabelDistribution sharpen(const LabelDistribution& probs, double temperature);

// Drops each entry with probability `drop`, rescaling survivors by 1/(1-drop).
FeatureVector augment_features(const FeatureVector& x, double drop, Rng& rng);

}  // namespace crisis
