#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace ncerg {

using cplx = std::complex<double>;

/// Dense complex matrix, row-major. Value type: copyable, immutable use is
/// by convention (operations return new matrices).
class CMat {
public:
  CMat() = default;
  CMat(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols) {}

  static CMat identity(int n);
  static CMat diag(const std::vector<double>& d);
  static CMat diag_complex(const std::vector<cplx>& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  cplx& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

  const std::vector<cplx>& data() const { return a_; }
  std::vector<cplx>& data() { return a_; }

  CMat operator+(const CMat& o) const;
  CMat operator-(const CMat& o) const;
  CMat operator*(const CMat& o) const;
  CMat& operator+=(const CMat& o);
  CMat& operator-=(const CMat& o);
  CMat scaled(cplx c) const;
  CMat adjoint() const;
  CMat transpose() const;
  CMat conj() const;

  std::vector<cplx> matvec(const std::vector<cplx>& v) const;

  cplx trace() const;
  double frobenius() const;
  double max_abs() const;
  /// Frobenius norm of the strictly off-diagonal part.
  double offdiag_frobenius() const;
  /// max_ij |a_ij - b_ij|
  double max_abs_diff(const CMat& o) const;

  double hermiticity_defect() const;  // max |a_ij - conj(a_ji)|
  bool is_hermitian(double tol) const { return hermiticity_defect() <= tol; }
  bool all_finite() const;

  /// Column j as a vector.
  std::vector<cplx> col(int j) const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<cplx> a_;
};

CMat operator*(cplx c, const CMat& m);

}  // namespace ncerg
