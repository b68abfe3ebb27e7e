#ifndef POROMEM_KINETICS_HPP
#define POROMEM_KINETICS_HPP

// Interface exchange kinetics h(c^f, c^s). Only globally Lipschitz variants
// are representable; the Lipschitz constant is available in closed form and
// can be cross-checked by sampling.

namespace poromem::kin {

enum class Variant { Zero, Linear, Saturating };

struct KineticsSpec {
    Variant variant = Variant::Zero;
    double k = 0.0;    // Linear rate
    double k1 = 0.0;   // Saturating
    double k2 = 0.0;
};

// h(a,b): Linear k*(a-b); Saturating k1*a/(1+|a|) - k2*b/(1+|b|); Zero 0.
double eval_h(const KineticsSpec& spec, double a, double b);

// Analytic Lipschitz constant with respect to the l1 norm on (a,b).
double lipschitz_constant(const KineticsSpec& spec);

// Sampled difference-quotient supremum over a deterministic low-discrepancy
// grid in [-10,10]^2. Never exceeds lipschitz_constant() beyond round-off.
double lipschitz_certificate(const KineticsSpec& spec, int samples);

} // namespace poromem::kin

#endif
