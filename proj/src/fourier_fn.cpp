#include "sg/fourier_fn.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include <unsupported/Eigen/FFT>

namespace sg {

namespace {

size_t product(const std::vector<int>& d) {
  size_t n = 1;
  for (int x : d) n *= static_cast<size_t>(x);
  return n;
}

int wavenumber(int j, int N) {
  if (2 * j < N) return j;
  if (2 * j == N) return 0;
  return j - N;
}

void check_same(const GridFunction& a, const GridFunction& b) {
  if (a.dims() != b.dims() || a.m() != b.m()) throw Error("grid function shape mismatch");
}

// Applies fn to every line along `axis` of every matrix entry.
template <class F>
void for_lines(std::vector<cplx>& v, const std::vector<int>& dims, size_t block, int axis, F&& fn) {
  const size_t N = static_cast<size_t>(dims[axis]);
  size_t inner = 1, outer = 1;
  for (int i = axis + 1; i < static_cast<int>(dims.size()); ++i) inner *= dims[i];
  for (int i = 0; i < axis; ++i) outer *= dims[i];
  std::vector<cplx> line(N), out(N);
  for (size_t o = 0; o < outer; ++o)
    for (size_t in = 0; in < inner; ++in)
      for (size_t e = 0; e < block; ++e) {
        for (size_t j = 0; j < N; ++j) line[j] = v[((o * N + j) * inner + in) * block + e];
        fn(line);
        for (size_t j = 0; j < N; ++j) v[((o * N + j) * inner + in) * block + e] = line[j];
      }
}

}  // namespace

GridFunction::GridFunction(std::vector<int> dims, int m) : dims_(std::move(dims)), m_(m) {
  if (dims_.size() > 4) throw Error("torus dimension too large");
  for (int n : dims_)
    if (n < 8 || n % 2) throw Error("grid sizes must be even and >= 8");
  if (m < 1) throw Error("matrix dimension must be positive");
  npts_ = product(dims_);
  vals_.assign(npts_ * block(), cplx(0.0));
}

GridFunction GridFunction::sample(const std::vector<int>& dims, int m,
                                  const std::function<Mat(const std::vector<double>&)>& fn,
                                  bool smooth, double threshold) {
  GridFunction g(dims, m);
  for (size_t p = 0; p < g.points(); ++p) {
    Mat v = fn(g.coords(p));
    if (v.rows() != m || v.cols() != m) throw Error("sampled value has wrong shape");
    g.at(p) = v;
  }
  if (smooth) g.certify(threshold);
  return g;
}

GridFunction GridFunction::constant(const std::vector<int>& dims, const Mat& value) {
  GridFunction g(dims, static_cast<int>(value.rows()));
  for (size_t p = 0; p < g.points(); ++p) g.at(p) = value;
  g.certified_ = true;
  return g;
}

GridFunction GridFunction::identity(const std::vector<int>& dims, int m) {
  return constant(dims, Mat::Identity(m, m));
}

std::vector<double> GridFunction::coords(size_t p) const {
  std::vector<double> x(dims_.size());
  for (int i = dim() - 1; i >= 0; --i) {
    x[i] = static_cast<double>(p % dims_[i]) / dims_[i];
    p /= dims_[i];
  }
  return x;
}

double GridFunction::sup_norm() const {
  double s = 0.0;
  for (const auto& v : vals_) s = std::max(s, std::abs(v));
  return s;
}

double GridFunction::tail_fraction() const {
  if (dims_.empty()) return 0.0;
  std::vector<cplx> v = vals_;
  Eigen::FFT<double> fft;
  for (int a = 0; a < dim(); ++a) {
    std::vector<cplx> tmp;
    for_lines(v, dims_, block(), a, [&](std::vector<cplx>& line) {
      fft.fwd(tmp, line);
      line = tmp;
    });
  }
  double total = 0.0, tail = 0.0;
  for (size_t p = 0; p < npts_; ++p) {
    bool in_tail = false;
    size_t q = p;
    for (int i = dim() - 1; i >= 0; --i) {
      int k = std::abs(wavenumber(static_cast<int>(q % dims_[i]), dims_[i]));
      q /= dims_[i];
      if (3 * k > dims_[i]) in_tail = true;
    }
    for (size_t e = 0; e < block(); ++e) {
      double w = std::norm(v[p * block() + e]);
      total += w;
      if (in_tail) tail += w;
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

void GridFunction::certify(double threshold) {
  certified_ = true;
  warning_ = tail_fraction() > threshold;
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  check_same(*this, o);
  for (size_t i = 0; i < vals_.size(); ++i) vals_[i] += o.vals_[i];
  warning_ = warning_ || o.warning_;
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  check_same(*this, o);
  for (size_t i = 0; i < vals_.size(); ++i) vals_[i] -= o.vals_[i];
  warning_ = warning_ || o.warning_;
  return *this;
}

GridFunction& GridFunction::operator*=(cplx a) {
  for (auto& v : vals_) v *= a;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(cplx a, GridFunction f) { return f *= a; }

GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  check_same(a, b);
  GridFunction r(a.dims(), a.m());
  const int m = a.m();
  const size_t bl = a.block();
  const cplx* A = a.data();
  const cplx* B = b.data();
  cplx* R = r.data();
  for (size_t p = 0; p < a.points(); ++p) {
    const cplx* x = A + p * bl;
    const cplx* y = B + p * bl;
    cplx* z = R + p * bl;
    for (int c = 0; c < m; ++c)
      for (int k = 0; k < m; ++k) {
        const cplx ykc = y[c * m + k];
        if (ykc == cplx(0.0)) continue;
        for (int rr = 0; rr < m; ++rr) z[c * m + rr] += x[k * m + rr] * ykc;
      }
  }
  r.set_warning(a.accuracy_warning() || b.accuracy_warning());
  return r;
}

GridFunction adjoint(const GridFunction& f) {
  GridFunction r(f.dims(), f.m());
  for (size_t p = 0; p < f.points(); ++p) r.at(p) = f.at(p).adjoint();
  r.set_warning(f.accuracy_warning());
  return r;
}

GridFunction trace(const GridFunction& f) {
  GridFunction r(f.dims(), 1);
  for (size_t p = 0; p < f.points(); ++p) r.at(p)(0, 0) = f.at(p).trace();
  r.set_warning(f.accuracy_warning());
  return r;
}

GridFunction map_points(const GridFunction& f, int m_out, const std::function<Mat(const Mat&)>& fn) {
  GridFunction r(f.dims(), m_out);
  for (size_t p = 0; p < f.points(); ++p) r.at(p) = fn(f.at(p));
  r.set_warning(f.accuracy_warning());
  return r;
}

GridFunction spectral_derivative(const GridFunction& fn, int direction) {
  if (direction < 0 || direction >= fn.dim()) throw Error("derivative direction out of range");
  GridFunction r = fn;
  const int N = fn.dims()[direction];
  std::vector<cplx> buf(r.data(), r.data() + r.points() * r.block());
  Eigen::FFT<double> fft;
  std::vector<cplx> hat, back;
  for_lines(buf, fn.dims(), fn.block(), direction, [&](std::vector<cplx>& line) {
    fft.fwd(hat, line);
    for (int j = 0; j < N; ++j) hat[j] *= cplx(0.0, kTwoPi * wavenumber(j, N));
    fft.inv(back, hat);
    line = back;
  });
  std::memcpy(static_cast<void*>(r.data()), buf.data(), buf.size() * sizeof(cplx));
  r.set_warning(fn.accuracy_warning());
  return r;
}

int degree(Mask I) { return std::popcount(I); }

namespace {

// Sign of sorting the concatenation (I, J) of two disjoint ascending lists.
int merge_sign(Mask I, Mask J) {
  int inv = 0;
  for (int b = 0; b < 32; ++b)
    if (J & (1u << b)) inv += std::popcount(I & ~((2u << b) - 1u));
  return (inv % 2) ? -1 : 1;
}

}  // namespace

DifferentialForm DifferentialForm::zero_form(const GridFunction& f) {
  DifferentialForm w(f.dims(), f.m());
  w.set(0u, f);
  return w;
}

void DifferentialForm::add(const std::vector<int>& idx, const GridFunction& f) {
  Mask I = 0;
  int sign = 1;
  for (int i : idx) {
    if (i < -1 || i >= dim()) throw Error("form index out of range");
    Mask b = (i < 0) ? kMaskS : mask_dx(i);
    if (I & b) throw Error("repeated index in multi-index");
    // inserting b after the existing indices: count existing indices above b
    if (std::popcount(I & ~((b << 1) - 1u)) % 2) sign = -sign;
    I |= b;
  }
  GridFunction g = f;
  if (sign < 0) g *= -1.0;
  add_mask(I, g);
}

void DifferentialForm::add_mask(Mask I, const GridFunction& f) {
  if (f.dims() != dims_ || f.m() != m_) throw Error("form coefficient shape mismatch");
  if (I >> (dim() + 1)) throw Error("mask exceeds base dimension");
  auto it = c_.find(I);
  if (it == c_.end())
    c_.emplace(I, f);
  else
    it->second += f;
}

void DifferentialForm::set(Mask I, GridFunction f) {
  if (f.dims() != dims_ || f.m() != m_) throw Error("form coefficient shape mismatch");
  if (I >> (dim() + 1)) throw Error("mask exceeds base dimension");
  c_[I] = std::move(f);
}

const GridFunction* DifferentialForm::get(Mask I) const {
  auto it = c_.find(I);
  return it == c_.end() ? nullptr : &it->second;
}

DifferentialForm& DifferentialForm::operator+=(const DifferentialForm& o) {
  if (o.dims_ != dims_ || o.m_ != m_) throw Error("form shape mismatch");
  for (const auto& [I, f] : o.c_) add_mask(I, f);
  return *this;
}

DifferentialForm& DifferentialForm::operator-=(const DifferentialForm& o) {
  if (o.dims_ != dims_ || o.m_ != m_) throw Error("form shape mismatch");
  for (const auto& [I, f] : o.c_) add_mask(I, -1.0 * f);
  return *this;
}

DifferentialForm& DifferentialForm::operator*=(cplx a) {
  for (auto& [I, f] : c_) f *= a;
  return *this;
}

double DifferentialForm::sup_norm() const {
  double s = 0.0;
  for (const auto& [I, f] : c_) s = std::max(s, f.sup_norm());
  return s;
}

DifferentialForm DifferentialForm::of_degree(int k) const {
  DifferentialForm r(dims_, m_);
  for (const auto& [I, f] : c_)
    if (degree(I) == k) r.set(I, f);
  return r;
}

bool DifferentialForm::accuracy_warning() const {
  for (const auto& [I, f] : c_)
    if (f.accuracy_warning()) return true;
  return false;
}

DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b) { return a += b; }
DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b) { return a -= b; }
DifferentialForm operator*(cplx a, DifferentialForm f) { return f *= a; }

DifferentialForm d_exterior(const DifferentialForm& w) {
  DifferentialForm r(w.dims(), w.m());
  for (const auto& [I, f] : w.components()) {
    for (int i = 0; i < w.dim(); ++i) {
      Mask b = mask_dx(i);
      if (I & b) continue;
      GridFunction df = spectral_derivative(f, i);
      if (std::popcount(I & (b - 1u)) % 2) df *= -1.0;
      r.add_mask(I | b, df);
    }
  }
  return r;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b, int max_degree) {
  if (a.dims() != b.dims() || a.m() != b.m()) throw Error("wedge: shape mismatch");
  DifferentialForm r(a.dims(), a.m());
  for (const auto& [I, f] : a.components())
    for (const auto& [J, g] : b.components()) {
      if (I & J) continue;
      if (degree(I | J) > max_degree) continue;
      GridFunction fg = f * g;
      if (merge_sign(I, J) < 0) fg *= -1.0;
      r.add_mask(I | J, fg);
    }
  return r;
}

DifferentialForm trace(const DifferentialForm& w) {
  DifferentialForm r(w.dims(), 1);
  for (const auto& [I, f] : w.components()) r.set(I, trace(f));
  return r;
}

DifferentialForm left_mul(const GridFunction& f, const DifferentialForm& w) {
  DifferentialForm r(w.dims(), w.m());
  for (const auto& [I, g] : w.components()) r.set(I, f * g);
  return r;
}

DifferentialForm right_mul(const DifferentialForm& w, const GridFunction& f) {
  DifferentialForm r(w.dims(), w.m());
  for (const auto& [I, g] : w.components()) r.set(I, g * f);
  return r;
}

cplx integrate(const DifferentialForm& w) {
  if (w.m() != 1) throw Error("integrate needs scalar coefficients (take the trace first)");
  Mask top = 0;
  for (int i = 0; i < w.dim(); ++i) top |= mask_dx(i);
  const GridFunction* f = w.get(top);
  if (!f) return 0.0;
  cplx s = 0.0;
  for (size_t p = 0; p < f->points(); ++p) s += f->at(p)(0, 0);
  return s / static_cast<double>(f->points());
}

DifferentialForm pushforward_circle(const DifferentialForm& w) {
  if (w.dim() < 1) throw Error("pushforward needs a circle factor");
  std::vector<int> base(w.dims().begin() + 1, w.dims().end());
  const int N = w.dims()[0];
  DifferentialForm r(base, w.m());
  const Mask th = mask_dx(0);
  for (const auto& [I, f] : w.components()) {
    if (!(I & th)) continue;
    const int sign = (I & kMaskS) ? -1 : 1;
    const Mask J = (I & kMaskS) | ((I >> 2) << 1);
    GridFunction g(base, w.m());
    std::vector<cplx> acc(f.points() / N * f.block(), cplx(0.0));
    const size_t inner = f.points() / N;
    for (int j = 0; j < N; ++j)
      for (size_t q = 0; q < inner; ++q)
        for (size_t e = 0; e < f.block(); ++e) acc[q * f.block() + e] += f.data()[(j * inner + q) * f.block() + e];
    for (size_t i = 0; i < acc.size(); ++i) g.data()[i] = acc[i] * (static_cast<double>(sign) / N);
    g.set_warning(f.accuracy_warning());
    r.add_mask(J, g);
  }
  return r;
}

DifferentialForm contract_ds(const DifferentialForm& w) {
  DifferentialForm r(w.dims(), w.m());
  for (const auto& [I, f] : w.components())
    if (I & kMaskS) r.set(I & ~kMaskS, f);
  return r;
}

DifferentialForm ds_wedge(const DifferentialForm& w) {
  DifferentialForm r(w.dims(), w.m());
  for (const auto& [I, f] : w.components())
    if (!(I & kMaskS)) r.set(I | kMaskS, f);
  return r;
}

namespace {

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("container: truncated input");
  return v;
}

constexpr uint32_t kGridMagic = 0x46475753;  // "SWGF"
constexpr uint32_t kFormMagic = 0x46445753;  // "SWDF"
constexpr uint32_t kVersion = 1;

}  // namespace

void write_grid(std::ostream& os, const GridFunction& f) {
  put(os, kGridMagic);
  put(os, kVersion);
  put(os, static_cast<uint32_t>(f.dim()));
  for (int n : f.dims()) put(os, static_cast<uint32_t>(n));
  put(os, static_cast<uint32_t>(f.m()));
  for (size_t p = 0; p < f.points(); ++p)
    for (int r = 0; r < f.m(); ++r)
      for (int c = 0; c < f.m(); ++c) {
        cplx v = f.at(p)(r, c);
        put(os, v.real());
        put(os, v.imag());
      }
}

GridFunction read_grid(std::istream& is) {
  if (take<uint32_t>(is) != kGridMagic) throw Error("container: bad grid magic");
  if (take<uint32_t>(is) != kVersion) throw Error("container: unsupported version");
  uint32_t d = take<uint32_t>(is);
  if (d > 4) throw Error("container: bad dimension");
  std::vector<int> dims(d);
  for (auto& n : dims) n = static_cast<int>(take<uint32_t>(is));
  int m = static_cast<int>(take<uint32_t>(is));
  GridFunction f(dims, m);
  for (size_t p = 0; p < f.points(); ++p)
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        double re = take<double>(is), im = take<double>(is);
        f.at(p)(r, c) = cplx(re, im);
      }
  return f;
}

void write_form(std::ostream& os, const DifferentialForm& w) {
  put(os, kFormMagic);
  put(os, kVersion);
  put(os, static_cast<uint32_t>(w.dim()));
  for (int n : w.dims()) put(os, static_cast<uint32_t>(n));
  put(os, static_cast<uint32_t>(w.m()));
  put(os, static_cast<uint32_t>(w.components().size()));
  for (const auto& [I, f] : w.components()) {
    put(os, static_cast<uint32_t>(I));
    write_grid(os, f);
  }
}

DifferentialForm read_form(std::istream& is) {
  if (take<uint32_t>(is) != kFormMagic) throw Error("container: bad form magic");
  if (take<uint32_t>(is) != kVersion) throw Error("container: unsupported version");
  uint32_t d = take<uint32_t>(is);
  if (d > 4) throw Error("container: bad dimension");
  std::vector<int> dims(d);
  for (auto& n : dims) n = static_cast<int>(take<uint32_t>(is));
  int m = static_cast<int>(take<uint32_t>(is));
  uint32_t nc = take<uint32_t>(is);
  DifferentialForm w(dims, m);
  for (uint32_t i = 0; i < nc; ++i) {
    Mask I = take<uint32_t>(is);
    w.set(I, read_grid(is));
  }
  return w;
}

}  // namespace sg
