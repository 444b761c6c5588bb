#pragma once

#include <functional>
#include <vector>

#include "core/tensor.hpp"

namespace litetok {

// Reverse-mode tape. Ops append one backward step each as they execute;
// backward() replays them in exact reverse execution order. A tape belongs
// to a single forward pass; no reuse across steps.
class Tape {
  public:
    void record(std::function<void()> backward_step) { steps_.push_back(std::move(backward_step)); }

    // Seeds grad=1 on a scalar loss and runs every recorded step in reverse.
    // Leaf gradients accumulate additively across fan-out.
    void backward(const TensorPtr& loss);

    size_t num_ops() const { return steps_.size(); }
    void clear() { steps_.clear(); }

  private:
    std::vector<std::function<void()>> steps_;
};

}  // namespace litetok
