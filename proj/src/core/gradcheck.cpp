#include "core/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "core/ops.hpp"

namespace litetok {

namespace {

double eval_value(const std::function<TensorPtr(Tape*)>& f) {
    TensorPtr v = f(nullptr);
    if (!v || v->numel() != 1) throw ContractError("finite_difference_check: f must return a scalar");
    double s = scalar_value(*v);
    if (std::isnan(s)) throw NumericError("finite_difference_check: f returned NaN");
    return s;
}

}  // namespace

FdReport finite_difference_check(const std::function<TensorPtr(Tape*)>& f,
                                 const std::vector<TensorPtr>& params, const FdOptions& opt) {
    if (opt.h <= 0.0) throw ContractError("finite_difference_check: h must be positive");
    for (const auto& p : params) p->zero_grad();

    Tape tape;
    TensorPtr loss = f(&tape);
    if (!loss || loss->numel() != 1) throw ContractError("finite_difference_check: f must return a scalar");
    if (std::isnan(scalar_value(*loss))) throw NumericError("finite_difference_check: f returned NaN");
    tape.backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params) {
        std::vector<double> g(static_cast<size_t>(p->numel()), 0.0);
        if (!p->grad.empty())
            for (int64_t i = 0; i < p->numel(); ++i) g[i] = p->grad[i];
        analytic.push_back(std::move(g));
    }

    Rng rng(opt.seed);
    FdReport report;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = *params[pi];
        const auto& g = analytic[pi];
        std::vector<int64_t> coords;
        if (p.numel() <= opt.coords_per_tensor) {
            for (int64_t i = 0; i < p.numel(); ++i) coords.push_back(i);
        } else {
            for (int64_t k = 0; k < opt.coords_per_tensor; ++k)
                coords.push_back(rng.uniform_int(0, p.numel() - 1));
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
        }
        for (int64_t i : coords) {
            if (std::fabs(g[i]) < opt.min_abs_grad) continue;
            float saved = p.data[i];
            float up = static_cast<float>(double(saved) + opt.h);
            float dn = static_cast<float>(double(saved) - opt.h);
            double denom = double(up) - double(dn);
            if (denom == 0.0) continue;
            p.data[i] = up;
            double fp = eval_value(f);
            p.data[i] = dn;
            double fm = eval_value(f);
            p.data[i] = saved;
            double central = (fp - fm) / denom;
            double rel = std::fabs(g[i] - central) / (std::fabs(g[i]) + std::fabs(central) + 1e-8);
            report.max_rel_err = std::max(report.max_rel_err, rel);
            report.coords_checked++;
        }
    }
    return report;
}

}  // namespace litetok
