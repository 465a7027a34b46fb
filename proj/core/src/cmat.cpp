#include "ncerg/cmat.hpp"

#include <cmath>

#include "ncerg/error.hpp"

namespace ncerg {

namespace {
void require_same_size(const CMat& a, const CMat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": size mismatch " +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
}
}  // namespace

CMat CMat::identity(int n) {
  CMat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMat CMat::diag(const std::vector<double>& d) {
  CMat m(int(d.size()), int(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(int(i), int(i)) = d[i];
  return m;
}

CMat CMat::diag_complex(const std::vector<cplx>& d) {
  CMat m(int(d.size()), int(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(int(i), int(i)) = d[i];
  return m;
}

CMat CMat::operator+(const CMat& o) const {
  require_same_size(*this, o, "add");
  CMat r = *this;
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] += o.a_[i];
  return r;
}

CMat CMat::operator-(const CMat& o) const {
  require_same_size(*this, o, "sub");
  CMat r = *this;
  for (size_t i = 0; i < a_.size(); ++i) r.a_[i] -= o.a_[i];
  return r;
}

CMat& CMat::operator+=(const CMat& o) {
  require_same_size(*this, o, "add");
  for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

CMat& CMat::operator-=(const CMat& o) {
  require_same_size(*this, o, "sub");
  for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

CMat CMat::operator*(const CMat& o) const {
  if (cols_ != o.rows_) {
    throw InvalidArgument("mul: inner dimension mismatch " + std::to_string(cols_) +
                          " vs " + std::to_string(o.rows_));
  }
  CMat r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const cplx aik = (*this)(i, k);
      if (aik == cplx(0.0)) continue;
      const cplx* brow = &o.a_[size_t(k) * o.cols_];
      cplx* rrow = &r.a_[size_t(i) * o.cols_];
      for (int j = 0; j < o.cols_; ++j) rrow[j] += aik * brow[j];
    }
  }
  return r;
}

CMat CMat::scaled(cplx c) const {
  CMat r = *this;
  for (auto& v : r.a_) v *= c;
  return r;
}

CMat CMat::adjoint() const {
  CMat r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

CMat CMat::transpose() const {
  CMat r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

CMat CMat::conj() const {
  CMat r = *this;
  for (auto& v : r.a_) v = std::conj(v);
  return r;
}

std::vector<cplx> CMat::matvec(const std::vector<cplx>& v) const {
  if (int(v.size()) != cols_) throw InvalidArgument("matvec: dimension mismatch");
  std::vector<cplx> r(rows_);
  for (int i = 0; i < rows_; ++i) {
    cplx acc = 0.0;
    const cplx* row = &a_[size_t(i) * cols_];
    for (int j = 0; j < cols_; ++j) acc += row[j] * v[j];
    r[i] = acc;
  }
  return r;
}

cplx CMat::trace() const {
  cplx t = 0.0;
  const int n = rows_ < cols_ ? rows_ : cols_;
  for (int i = 0; i < n; ++i) t += (*this)(i, i);
  return t;
}

double CMat::frobenius() const {
  double s = 0.0;
  for (const auto& v : a_) s += std::norm(v);
  return std::sqrt(s);
}

double CMat::max_abs() const {
  double m = 0.0;
  for (const auto& v : a_) m = std::max(m, std::abs(v));
  return m;
}

double CMat::offdiag_frobenius() const {
  double s = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j)
      if (i != j) s += std::norm((*this)(i, j));
  return std::sqrt(s);
}

double CMat::max_abs_diff(const CMat& o) const {
  require_same_size(*this, o, "max_abs_diff");
  double m = 0.0;
  for (size_t i = 0; i < a_.size(); ++i) m = std::max(m, std::abs(a_[i] - o.a_[i]));
  return m;
}

double CMat::hermiticity_defect() const {
  double m = 0.0;
  for (int i = 0; i < rows_; ++i)
    for (int j = i; j < cols_; ++j)
      m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return m;
}

bool CMat::all_finite() const {
  for (const auto& v : a_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

std::vector<cplx> CMat::col(int j) const {
  std::vector<cplx> c(rows_);
  for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

CMat operator*(cplx c, const CMat& m) { return m.scaled(c); }

}  // namespace ncerg
