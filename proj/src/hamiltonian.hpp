#pragma once

#include "model.hpp"

namespace mfg {

// Reduced Hamiltonian <b(t,x,mu,alpha), y> + f(t,x,mu,alpha).
double hamiltonian_value(const MfgModel& model, double t, const Vec& x, const DiscreteMeasure& mu,
                         const Vec& y, const Vec& alpha);

struct MinimizeOptions {
    double gradient_tol = 1e-8;
    int max_iters = 200;
};

// Unique minimizer of the Hamiltonian in the control. Closed form for LQ
// models; damped Newton with a gradient fallback otherwise. The returned
// point satisfies |dH/dalpha| <= gradient_tol and the a-priori bound
// |alpha| <= (|df_dalpha(.,0)| + |b2| |y|) / lambda.
Vec minimize_hamiltonian(const MfgModel& model, double t, const Vec& x, const DiscreteMeasure& mu,
                         const Vec& y, const MinimizeOptions& opts = {});

} // namespace mfg
