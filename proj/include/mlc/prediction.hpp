#pragma once

#include "mlc/matrix.hpp"

namespace mlc {

/// Per-instance label probabilities plus their thresholded binary labels.
struct Prediction {
    Matrix probabilities;  // N x d, entries in (0,1)
    Matrix labels;         // N x d, entries in {0,1}
};

/// Threshold must lie in (0,1); p >= threshold maps to 1.
Prediction make_prediction(Matrix probabilities, double threshold);

}  // namespace mlc
