#pragma once

#include "stvem/solver.hpp"

#include <functional>

namespace testutil {

/// Global DOF vector of a smooth scalar function, built cell by cell.
inline stvem::Vector global_dofs(const stvem::Discretization& disc, const std::function<stvem::Real(const stvem::Point&)>& f)
{
    stvem::Vector out = stvem::Vector::Zero(disc.map.size());
    for (std::size_t c = 0; c < disc.ops.size(); ++c) {
        const auto& e = disc.ops[c];
        const stvem::Vector local = stvem::interpolate_dofs(e.geom, e.layout, e.quad, e.basis, f);
        const auto& dofs = disc.map.cell_dofs(static_cast<int>(c));
        for (std::size_t i = 0; i < dofs.size(); ++i) out(dofs[i]) = local(static_cast<Eigen::Index>(i));
    }
    return out;
}

inline stvem::Vector global_vector_dofs(const stvem::Discretization& disc, const std::function<stvem::Point(const stvem::Point&)>& f)
{
    stvem::Vector out(2 * disc.map.size());
    out << global_dofs(disc, [&](const stvem::Point& x) { return f(x).x(); }),
        global_dofs(disc, [&](const stvem::Point& x) { return f(x).y(); });
    return out;
}

}  // namespace testutil
