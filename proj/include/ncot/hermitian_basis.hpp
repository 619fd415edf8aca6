#pragma once

// Real coordinates for Hermitian matrices in the Hilbert-Schmidt-orthonormal
// basis {E_ii} u {(E_ij + E_ji)/sqrt2} u {(-iE_ij + iE_ji)/sqrt2}, i < j.
// Coordinate index: diagonal entries first, then for each pair (i, j) with
// i < j in row-major order the symmetric and antisymmetric element.

#include <span>
#include <vector>

#include "ncot/matrix.hpp"

namespace ncot {

std::size_t hermitian_dimension(std::size_t n);
CMatrix hermitian_basis_element(std::size_t n, std::size_t index);
std::vector<double> hermitian_coords(const CMatrix& h);
CMatrix from_hermitian_coords(std::span<const double> x, std::size_t n);

}  // namespace ncot
