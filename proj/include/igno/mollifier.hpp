#pragma once

#include "igno/nn.hpp"

namespace igno {

// Jet of sin(pi x) sin(pi y) at scattered points: a 1 x N channel row that
// vanishes identically on the unit-square boundary.
Channels bubble_jet(const Matrix& xy, int order);

// Jet of the boundary drive cos(2 pi (x cos t + y sin t)), t = 2 pi l / L,
// evaluated anywhere in the domain; on the boundary it is the Dirichlet data.
Channels voltage_jet(const Matrix& xy, int pattern, int num_patterns, int order);

// Stacked drives for a batch: row i carries the jet of pattern[i].
Channels voltage_jet_rows(const Matrix& xy, const std::vector<int>& pattern,
                          int num_patterns, int order);

// u = G .* m + g with the 1-row jets m and g broadcast over the code rows of
// G; pass g = nullptr for homogeneous boundary data.
void mollify(const Channels& G, const Channels& m, const Channels* g, Channels& u);

// Pullback of the product rule: fills G_adj from the adjoint of u.
void mollify_adjoint(const Channels& u_adj, const Channels& m, Channels& G_adj);

}  // namespace igno
