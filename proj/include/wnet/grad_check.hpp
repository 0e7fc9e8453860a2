#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "wnet/rng.hpp"
#include "wnet/tape.hpp"

namespace wnet {

struct GradCheckResult {
    double max_rel_err = 0.0;
    i64 coords_checked = 0;
    std::string worst_coord;

    bool ok(double tol) const { return coords_checked > 0 && max_rel_err <= tol; }
};

// Central-difference check of the tape gradients.  forward must rebuild the
// graph from the current parameter values on every call and return the
// scalar loss.  When max_coords_per_param is positive, only that many
// coordinates per parameter are probed, chosen by a seeded shuffle so the
// selection is stable.  denom_floor keeps the relative error meaningful
// for near-zero gradients: coordinates where both sides are below it are
// held to |analytic - numeric| <= tol * denom_floor, which is what the
// finite difference can actually resolve.
inline GradCheckResult grad_check(std::vector<Parameter<double>*> params,
                                  const std::function<Var<double>(Tape<double>&)>& forward,
                                  double eps = 1e-5, i64 max_coords_per_param = -1,
                                  u64 seed = 0x67adc0de, double denom_floor = 1e-8) {
    GradCheckResult result;

    Tape<double> tape;
    const Var<double> loss = forward(tape);
    tape.backward(loss);
    std::vector<Tensor<double>> analytic;
    analytic.reserve(params.size());
    for (Parameter<double>* p : params) {
        if (!p->bound_on(tape) || !p->bound_var.tracked()) {
            throw ValueError("parameter " + p->name + " was not bound by forward()");
        }
        analytic.push_back(tape.grad(p->bound_var));
    }
    tape.reset();

    auto eval = [&]() {
        Tape<double> t;
        const Var<double> l = forward(t);
        return l.value.item();
    };

    Rng rng(seed);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter<double>& p = *params[pi];
        const i64 numel = p.value.numel();
        std::vector<i64> coords(static_cast<std::size_t>(numel));
        std::iota(coords.begin(), coords.end(), i64(0));
        if (max_coords_per_param > 0 && max_coords_per_param < numel) {
            rng.shuffle(coords);
            coords.resize(static_cast<std::size_t>(max_coords_per_param));
        }
        double* values = p.value.mutable_data();
        const double* grads = analytic[pi].data();
        for (i64 c : coords) {
            const double saved = values[c];
            values[c] = saved + eps;
            const double up = eval();
            values[c] = saved - eps;
            const double down = eval();
            values[c] = saved;
            const double fd = (up - down) / (2.0 * eps);
            const double ad = grads[c];
            const double rel =
                std::fabs(ad - fd) / std::max({std::fabs(ad), std::fabs(fd), denom_floor});
            ++result.coords_checked;
            if (rel > result.max_rel_err) {
                result.max_rel_err = rel;
                std::ostringstream where;
                where << p.name << "[" << c << "] analytic=" << ad << " numeric=" << fd;
                result.worst_coord = where.str();
            }
        }
    }
    return result;
}

}  // namespace wnet
