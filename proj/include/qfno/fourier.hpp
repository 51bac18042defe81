#pragma once

#include "qfno/types.hpp"

namespace qfno {

/// Unitary DFT along each row: forward uses exp(+i 2 pi jk / n) / sqrt(n),
/// inverse uses exp(-i 2 pi jk / n) / sqrt(n). Any row length is accepted.
CMatrix dft_rows(const CMatrix& a, bool inverse = false);

/// Same transform on a single vector.
CVector dft(const CVector& x, bool inverse = false);

}  // namespace qfno
