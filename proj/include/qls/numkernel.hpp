#ifndef QLS_NUMKERNEL_HPP
#define QLS_NUMKERNEL_HPP

#include "qls/core.hpp"
#include "qls/ldlt.hpp"
#include "qls/qr.hpp"
#include "qls/svd.hpp"
#include "qls/sym_eigen.hpp"
#include "qls/triangular.hpp"

#endif  // QLS_NUMKERNEL_HPP
