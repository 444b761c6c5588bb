#include "core/tensor.hpp"

#include <cmath>
#include <sstream>

namespace litetok {

int64_t shape_numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t e : shape) {
        if (e <= 0) throw DimensionError("tensor extents must be positive, got " + shape_to_string(shape));
        n *= e;
    }
    return n;
}

std::string shape_to_string(const std::vector<int64_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<int64_t> s, float fill) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(shape_numel(shape)), fill);
}

int64_t Tensor::rows() const {
    if (shape.empty()) return 1;
    int64_t r = 1;
    for (size_t i = 0; i + 1 < shape.size(); ++i) r *= shape[i];
    return r;
}

void Tensor::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0f);
}

bool Tensor::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

TensorPtr make_tensor(std::vector<int64_t> shape, float fill) {
    return std::make_shared<Tensor>(std::move(shape), fill);
}

TensorPtr make_tensor(std::vector<int64_t> shape, std::vector<float> values) {
    auto t = std::make_shared<Tensor>(std::move(shape));
    if (static_cast<int64_t>(values.size()) != t->numel())
        throw DimensionError("value count does not match shape " + t->shape_str());
    t->data = std::move(values);
    return t;
}

TensorPtr clone_tensor(const Tensor& t) {
    auto c = std::make_shared<Tensor>();
    c->shape = t.shape;
    c->data = t.data;
    c->requires_grad = t.requires_grad;
    return c;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape != b.shape)
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace litetok
