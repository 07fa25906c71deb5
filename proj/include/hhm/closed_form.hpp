#pragma once

#include <string>

#include "hhm/mapping.hpp"

namespace hhm {

// Closed-form maps with analytic Jacobians, used as oracles and as engineered
// growth witnesses:
//   lacunary:alpha=A[:terms=K]   n = 2, (Re f, Im f) with f(z) = sum_k 2^(kA) z^(2^k);
//                                M_p(r, u) grows like (1-r)^(-A) for every p
//   powersing:gamma=G            n = 2, (Re f, Im f) with f(z) = (1 - z)^(-G);
//                                M_p(r, u) grows like (1-r)^(1/p - G) when G > 1/p
//   poly                         any n, scalar x1^2 x2 + |x|^4 + x1 (not harmonic)
bool is_closed_form(const std::string& spec);
MappingPtr make_closed_form(const std::string& spec, int dim);

}  // namespace hhm
