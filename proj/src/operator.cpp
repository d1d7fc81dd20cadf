#include "mpkrylov/operator.hpp"

#include <utility>

namespace mpk {

namespace {

DenseMatrix dense_transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows(), a.precision());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

}  // namespace

CsrOperator::CsrOperator(const CsrMatrix& a) : a_(a) {
  if (a.rows() != a.cols()) throw ContractViolation("CsrOperator: matrix must be square");
}

DenseOperator::DenseOperator(DenseMatrix a) : a_(std::move(a)), at_(dense_transpose(a_)) {
  if (a_.rows() != a_.cols()) throw ContractViolation("DenseOperator: matrix must be square");
}

}  // namespace mpk
