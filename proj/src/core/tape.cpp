#include "core/tape.hpp"

namespace litetok {

void Tape::backward(const TensorPtr& loss) {
    if (!loss) throw ContractError("backward: null loss");
    if (loss->numel() != 1)
        throw ContractError("backward: loss must be scalar, got shape " + loss->shape_str());
    loss->ensure_grad();
    loss->grad[0] = 1.0f;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

}  // namespace litetok
