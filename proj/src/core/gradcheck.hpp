#pragma once

#include <functional>
#include <vector>

#include "core/rng.hpp"
#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace litetok {

// Central-difference gradient checker. f builds the scalar loss from the
// given parameters; called with a tape for the analytic pass and with null
// for value-only re-evaluations. f must be deterministic.
//
// Relative error per coordinate: |analytic - central| / (|analytic| + |central| + 1e-8).
// Coordinates whose analytic gradient magnitude falls below min_abs_grad are
// skipped: with f32 storage the loss carries ~1e-7 relative rounding noise per
// evaluation, so central differences at a fixed h cannot resolve gradients
// below roughly that noise divided by h. The step is snapped to the actually
// representable perturbation before dividing.
struct FdOptions {
    double h = 1e-3;
    int64_t coords_per_tensor = 8;
    double min_abs_grad = 0.0;
    uint64_t seed = 0x1234abcd;
};

struct FdReport {
    double max_rel_err = 0.0;
    int64_t coords_checked = 0;
};

FdReport finite_difference_check(const std::function<TensorPtr(Tape*)>& f,
                                 const std::vector<TensorPtr>& params, const FdOptions& opt = {});

}  // namespace litetok
