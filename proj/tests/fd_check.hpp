#pragma once

// Central finite-difference gradient checker used by the autodiff, encoder,
// and acceptance suites. Everything runs in double; the analytic side replays
// the same graph-building lambda on a fresh tape.

#include <cmath>
#include <functional>
#include <vector>

#include "skelrep/rng.hpp"
#include "skelrep/tape.hpp"
#include "skelrep/tensor.hpp"

namespace fd {

using skelrep::TapeD;
using skelrep::TensorD;

// Builds a scalar loss node from grad-carrying leaves pushed in order.
using GraphFn = std::function<int(TapeD&, const std::vector<int>&)>;

struct FdResult {
    double max_rel_err = 0.0;
    long checked = 0;
};

inline double eval(const GraphFn& fn, const std::vector<TensorD>& inputs) {
    TapeD tape;
    std::vector<int> ids;
    for (const auto& t : inputs) ids.push_back(tape.leaf(t));
    int loss = fn(tape, ids);
    return tape.value(loss).at(0);
}

// Checks coordinates of every input against a central difference with step h.
// Relative error is |a - n| / max(|n|, floor); coordinates where both sides
// are tiny are counted but cannot fail. Tensors larger than max_coords_per_
// tensor are probed on a seeded random subset to keep runtime bounded.
inline FdResult check_gradients(const GraphFn& fn, const std::vector<TensorD>& inputs, double h = 1e-5,
                                double floor_abs = 1e-6, long max_coords_per_tensor = 0) {
    TapeD tape;
    std::vector<int> ids;
    for (const auto& t : inputs) ids.push_back(tape.leaf(t));
    int loss = fn(tape, ids);
    tape.backward(loss);

    skelrep::RngStream pick(0x10adULL, 0);
    FdResult r;
    for (size_t t = 0; t < inputs.size(); ++t) {
        const TensorD& analytic = tape.grad(ids[t]);
        std::vector<long> coords;
        long n = inputs[t].numel();
        if (max_coords_per_tensor > 0 && n > max_coords_per_tensor) {
            for (long c = 0; c < max_coords_per_tensor; ++c)
                coords.push_back(static_cast<long>(pick.uniform_int(static_cast<uint64_t>(n))));
        } else {
            for (long c = 0; c < n; ++c) coords.push_back(c);
        }
        for (long i : coords) {
            std::vector<TensorD> plus = inputs, minus = inputs;
            plus[t].at(i) += h;
            minus[t].at(i) -= h;
            double numeric = (eval(fn, plus) - eval(fn, minus)) / (2.0 * h);
            double a = analytic.at(i);
            double denom = std::max(std::fabs(numeric), floor_abs);
            double rel = std::fabs(a - numeric) / denom;
            if (std::fabs(a) < floor_abs && std::fabs(numeric) < floor_abs) rel = 0.0;
            if (rel > 0.1 * 1e-4) {
                // a difference quotient straddling a relu kink is not a
                // gradient bug. Shrink the step: if the quotient keeps
                // converging toward the analytic value it was kink bias
                // (skip if it has not converged within the budget); a genuine
                // gradient bug shows up as an error that stabilizes instead.
                double best = rel;
                double step = h;
                for (int it = 0; it < 4 && best > 0.1 * 1e-4; ++it) {
                    step *= 0.25;
                    plus[t].at(i) = inputs[t].at(i) + step;
                    minus[t].at(i) = inputs[t].at(i) - step;
                    double refined = (eval(fn, plus) - eval(fn, minus)) / (2.0 * step);
                    double e2 = std::fabs(a - refined) / std::max(std::fabs(refined), floor_abs);
                    best = std::min(best, e2);
                }
                if (best > 0.1 * 1e-4 && best < 0.5 * rel) continue;  // nonsmooth point
                rel = best;
            }
            if (rel > r.max_rel_err) r.max_rel_err = rel;
            ++r.checked;
        }
    }
    return r;
}

inline TensorD random_tensor(std::vector<int> shape, skelrep::RngStream& rng, double lo = -1.0, double hi = 1.0) {
    TensorD t(std::move(shape));
    for (auto& x : t.data) x = rng.uniform(lo, hi);
    return t;
}

}  // namespace fd
