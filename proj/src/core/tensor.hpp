#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace litetok {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : Error { using Error::Error; };
struct PartitionError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ContractError : Error { using Error::Error; };
struct SamplingError : Error { using Error::Error; };

int64_t shape_numel(const std::vector<int64_t>& shape);
std::string shape_to_string(const std::vector<int64_t>& shape);

// Dense row-major float tensor. `grad` stays empty until backward touches it.
// `scalar64` carries the double-accumulated value of scalar reductions so that
// finite-difference checks are not limited by the f32 store of the loss.
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<float> data;
    bool requires_grad = false;
    std::vector<float> grad;
    double scalar64 = std::numeric_limits<double>::quiet_NaN();

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> s, float fill = 0.0f);

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int64_t ndim() const { return static_cast<int64_t>(shape.size()); }
    // collapsed 2D view helpers: all leading axes x last axis
    int64_t rows() const;
    int64_t cols() const { return shape.empty() ? 1 : shape.back(); }

    void ensure_grad();
    void zero_grad() { grad.assign(data.size(), 0.0f); }
    bool all_finite() const;
    std::string shape_str() const { return shape_to_string(shape); }
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr make_tensor(std::vector<int64_t> shape, float fill = 0.0f);
TensorPtr make_tensor(std::vector<int64_t> shape, std::vector<float> values);
TensorPtr clone_tensor(const Tensor& t);

void check_same_shape(const Tensor& a, const Tensor& b, const char* op);

}  // namespace litetok
