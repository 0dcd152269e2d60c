#include "mlc/prediction.hpp"

#include <stdexcept>

namespace mlc {

Prediction make_prediction(Matrix probabilities, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("make_prediction: threshold " + std::to_string(threshold) +
                                    " outside (0,1)");
    Matrix labels(probabilities.rows(), probabilities.cols());
    for (std::size_t r = 0; r < probabilities.rows(); ++r)
        for (std::size_t c = 0; c < probabilities.cols(); ++c)
            labels(r, c) = probabilities(r, c) >= threshold ? 1.0 : 0.0;
    return {std::move(probabilities), std::move(labels)};
}

}  // namespace mlc
