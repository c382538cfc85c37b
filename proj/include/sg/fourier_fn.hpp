#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sg/common.hpp"

namespace sg {

// Matrix-valued function on the flat torus R^d/Z^d sampled on a uniform grid.
// Point index is row-major in the coordinates (axis 0 slowest); each point
// stores an m x m column-major block.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<int> dims, int m);

  // Samples fn at grid points x_i = j_i / N_i. When `smooth` is set the
  // smoothness certificate is evaluated.
  static GridFunction sample(const std::vector<int>& dims, int m,
                             const std::function<Mat(const std::vector<double>&)>& fn,
                             bool smooth = true, double threshold = 1e-12);
  static GridFunction constant(const std::vector<int>& dims, const Mat& value);
  static GridFunction identity(const std::vector<int>& dims, int m);

  const std::vector<int>& dims() const { return dims_; }
  int dim() const { return static_cast<int>(dims_.size()); }
  int m() const { return m_; }
  size_t points() const { return npts_; }
  size_t block() const { return static_cast<size_t>(m_) * m_; }

  Eigen::Map<Mat> at(size_t p) { return Eigen::Map<Mat>(vals_.data() + p * block(), m_, m_); }
  Eigen::Map<const Mat> at(size_t p) const {
    return Eigen::Map<const Mat>(vals_.data() + p * block(), m_, m_);
  }
  cplx* data() { return vals_.data(); }
  const cplx* data() const { return vals_.data(); }
  std::vector<double> coords(size_t p) const;

  double sup_norm() const;

  // Tail-energy fraction of the discrete spectrum in the top third of each axis.
  double tail_fraction() const;
  void certify(double threshold = 1e-12);
  bool certified() const { return certified_; }
  bool accuracy_warning() const { return warning_; }
  void set_warning(bool w) { warning_ = w; }

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(cplx a);

 private:
  std::vector<int> dims_;
  int m_ = 0;
  size_t npts_ = 0;
  std::vector<cplx> vals_;
  bool certified_ = false;
  bool warning_ = false;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(cplx a, GridFunction f);
// Pointwise matrix product.
GridFunction operator*(const GridFunction& a, const GridFunction& b);
GridFunction adjoint(const GridFunction& f);
GridFunction trace(const GridFunction& f);
GridFunction map_points(const GridFunction& f, int m_out, const std::function<Mat(const Mat&)>& fn);

// Axis derivative computed by multiplying Fourier coefficients by 2 pi i k.
GridFunction spectral_derivative(const GridFunction& fn, int direction);

// Multi-index bitmask: bit 0 is the external parameter s, bit i+1 is dx_i.
// Canonical order is ascending bit, so ds comes first.
using Mask = unsigned;
inline constexpr Mask kMaskS = 1u;
inline constexpr Mask mask_dx(int i) { return 1u << (i + 1); }
int degree(Mask I);

class DifferentialForm {
 public:
  DifferentialForm() = default;
  DifferentialForm(std::vector<int> dims, int m) : dims_(std::move(dims)), m_(m) {}
  static DifferentialForm zero_form(const GridFunction& f);

  const std::vector<int>& dims() const { return dims_; }
  int dim() const { return static_cast<int>(dims_.size()); }
  int m() const { return m_; }

  // Adds coefficient for dx_{idx[0]} ^ dx_{idx[1]} ^ ... where idx uses -1 for
  // ds and i >= 0 for coordinate i. The reordering sign is absorbed here.
  void add(const std::vector<int>& idx, const GridFunction& f);
  void add_mask(Mask I, const GridFunction& f);
  void set(Mask I, GridFunction f);
  const GridFunction* get(Mask I) const;
  const std::map<Mask, GridFunction>& components() const { return c_; }
  bool empty() const { return c_.empty(); }

  DifferentialForm& operator+=(const DifferentialForm& o);
  DifferentialForm& operator-=(const DifferentialForm& o);
  DifferentialForm& operator*=(cplx a);
  double sup_norm() const;
  // Components of the given degree only.
  DifferentialForm of_degree(int k) const;
  bool accuracy_warning() const;

 private:
  std::vector<int> dims_;
  int m_ = 0;
  std::map<Mask, GridFunction> c_;
};

DifferentialForm operator+(DifferentialForm a, const DifferentialForm& b);
DifferentialForm operator-(DifferentialForm a, const DifferentialForm& b);
DifferentialForm operator*(cplx a, DifferentialForm f);

DifferentialForm d_exterior(const DifferentialForm& w);
DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b, int max_degree = 4);
DifferentialForm trace(const DifferentialForm& w);
// Left/right multiplication of every coefficient by a 0-form.
DifferentialForm left_mul(const GridFunction& f, const DifferentialForm& w);
DifferentialForm right_mul(const DifferentialForm& w, const GridFunction& f);
// Integral of the top-degree (spatial) component; requires scalar coefficients.
cplx integrate(const DifferentialForm& w);
// Integration over the fiber circle (coordinate 0). dtheta is moved to the
// front before integrating; components without dtheta are dropped.
DifferentialForm pushforward_circle(const DifferentialForm& w);
// Drops the ds factor from components that contain it (ds moved to the front,
// which is already canonical). Components without ds are discarded.
DifferentialForm contract_ds(const DifferentialForm& w);
// Wedges ds on the left.
DifferentialForm ds_wedge(const DifferentialForm& w);

// Binary container: magic, version, dims, m, then row-major complex doubles.
void write_grid(std::ostream& os, const GridFunction& f);
GridFunction read_grid(std::istream& is);
void write_form(std::ostream& os, const DifferentialForm& w);
DifferentialForm read_form(std::istream& is);

}  // namespace sg
