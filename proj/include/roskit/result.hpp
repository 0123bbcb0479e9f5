#pragma once

#include <cmath>
#include <map>
#include <string>

namespace roskit {

/// A computed quantity with the route that produced it.
struct ConstantResult {
    double value = 0.0;
    std::string method;
    double error_bound = 0.0;
    std::map<std::string, double> diagnostics;

    [[nodiscard]] bool valid() const { return std::isfinite(value) && std::isfinite(error_bound) && error_bound >= 0.0; }
};

/// x^(1/p) with the error bound carried through to first order.
inline ConstantResult pth_root(ConstantResult r, double p) {
    const double root = std::pow(r.value, 1.0 / p);
    const double err = r.value > 0.0 ? root / (p * r.value) * r.error_bound : 0.0;
    r.diagnostics["moment"] = r.value;
    r.diagnostics["moment_error_bound"] = r.error_bound;
    r.value = root;
    r.error_bound = err;
    return r;
}

}  // namespace roskit
