#pragma once

// Library element matrices against the dense oracle on one cell.

#include "dense_oracle.hpp"

#include "stvem/forms.hpp"

#include <map>
#include <random>
#include <string>

namespace oracle {

inline double rel_frobenius(const Mat& a, const Mat& b)
{
    // Floor for matrices that vanish identically (LPS on P1 triangles).
    const double scale = std::max(b.norm(), 1e-6);
    return (a - b).norm() / scale;
}

/// Relative Frobenius mismatch of every local matrix on one element.
inline std::map<std::string, double> compare_element(const stvem::ElementGeometry& geom, int k, std::uint32_t seed)
{
    using namespace stvem;
    const ElementOps ops = build_element_ops(geom, k);
    std::vector<Vec2> verts(geom.vertices.begin(), geom.vertices.end());
    const Element el(verts, k);

    // Coefficients linear in phi keep every integrand polynomial, so both sides integrate exactly.
    ProblemSpec spec;
    spec.k = k;
    spec.mu = {[](Real t) { return 2 + 0.5 * t; }, 0, 10, false};
    spec.kappa = {[](Real t) { return 1 + 0.25 * t; }, 0, 10, false};
    spec.c1 = 0.7;
    spec.c2 = 1.3;
    spec.c3 = 0.4;

    std::mt19937 rng(seed);
    std::uniform_real_distribution<Real> u(-1, 1);
    const int N = ops.n_dofs();
    Vector phi(N), u1(N), u2(N);
    for (int i = 0; i < N; ++i) {
        phi(i) = 1 + 0.5 * u(rng);
        u1(i) = u(rng);
        u2(i) = u(rng);
    }

    Forms f{el};
    f.mu = spec.mu.value;
    f.kappa = spec.kappa.value;
    f.c1 = spec.c1;
    f.c2 = spec.c2;
    f.c3 = spec.c3;

    const Vector phic = project_scalar(ops, phi);
    const LpsTerms lps = local_lps_terms(ops, spec);
    std::map<std::string, double> out;
    out["viscous"] = rel_frobenius(local_viscous(ops, spec, phic), f.viscous(phi));
    out["divergence"] = rel_frobenius(local_divergence(ops), f.divergence());
    out["temperature"] = rel_frobenius(local_temperature(ops, spec, phic), f.temperature(phi));
    out["convection"] =
        rel_frobenius(local_convection(ops, {project_scalar(ops, u1), project_scalar(ops, u2)}), f.convection(u1, u2));
    out["L1"] = rel_frobenius(lps.L1, f.lps1());
    out["L2"] = rel_frobenius(lps.L2, f.lps2());
    out["L3"] = rel_frobenius(lps.L3, f.lps3());
    return out;
}

}  // namespace oracle
