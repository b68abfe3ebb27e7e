#include "poromem/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace poromem::kin {

double eval_h(const KineticsSpec& spec, double a, double b) {
    switch (spec.variant) {
        case Variant::Zero: return 0.0;
        case Variant::Linear: return spec.k * (a - b);
        case Variant::Saturating:
            return spec.k1 * a / (1.0 + std::fabs(a)) - spec.k2 * b / (1.0 + std::fabs(b));
    }
    return 0.0;
}

double lipschitz_constant(const KineticsSpec& spec) {
    switch (spec.variant) {
        case Variant::Zero: return 0.0;
        case Variant::Linear: return spec.k;
        case Variant::Saturating: return std::max(spec.k1, spec.k2);
    }
    return 0.0;
}

namespace {

double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

} // namespace

double lipschitz_certificate(const KineticsSpec& spec, int samples) {
    if (samples < 2) throw std::invalid_argument("lipschitz_certificate: samples must be >= 2");
    const int n = std::min(samples, 512);
    std::vector<double> ax(n), bx(n);
    for (int i = 0; i < n; ++i) {
        ax[i] = -10.0 + 20.0 * halton(i + 1, 2);
        bx[i] = -10.0 + 20.0 * halton(i + 1, 3);
    }
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
        const double hi = eval_h(spec, ax[i], bx[i]);
        for (int j = i + 1; j < n; ++j) {
            const double dist = std::fabs(ax[i] - ax[j]) + std::fabs(bx[i] - bx[j]);
            if (dist < 1e-12) continue;
            sup = std::max(sup, std::fabs(hi - eval_h(spec, ax[j], bx[j])) / dist);
        }
    }
    return sup;
}

} // namespace poromem::kin
