#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

namespace ldrift {

/// Points and small vectors in R^N, N <= 3. Unused trailing entries are zero.
using Point = std::array<double, 3>;
using Vec3 = std::array<double, 3>;

inline constexpr int kMaxDim = 3;

class DomainMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Axis-aligned box (0, L_1) x ... x (0, L_N) split into a uniform tensor grid.
///
/// Unknowns live on interior nodes (homogeneous Dirichlet data on the boundary
/// is implicit). Fluxes live on faces: the face k along axis a joins grid
/// nodes k and k+1 along that axis, so there are n_a faces per grid line.
/// Storage is row-major with axis 0 slowest.
class BoxDomain {
 public:
  BoxDomain(std::vector<double> lengths, std::vector<int> cells);

  /// Cube (0, L)^dim with n cells per axis.
  static BoxDomain cube(int dim, double length, int cells);

  int dim() const { return dim_; }
  double length(int axis) const { return lengths_[axis]; }
  int cells(int axis) const { return cells_[axis]; }
  double width(int axis) const { return widths_[axis]; }

  std::size_t interior_count() const { return interior_count_; }
  std::size_t face_count(int axis) const { return face_count_[axis]; }

  /// Quadrature weight carried by each interior node and each face.
  double cell_volume() const { return cell_volume_; }
  double volume() const;
  double diameter() const;

  /// Interior extents padded to three axes (missing axes have extent 1).
  const std::array<int, 3>& interior_extents() const { return ext_; }
  std::array<int, 3> face_extents(int axis) const;

  Point node_position(std::size_t flat) const;
  Point face_position(int axis, std::size_t flat) const;

  bool operator==(const BoxDomain& other) const {
    return dim_ == other.dim_ && lengths_ == other.lengths_ && cells_ == other.cells_;
  }

  std::string describe() const;

 private:
  int dim_;
  std::array<double, 3> lengths_{};
  std::array<int, 3> cells_{};
  std::array<double, 3> widths_{};
  std::array<int, 3> ext_{1, 1, 1};
  std::array<std::size_t, 3> face_count_{};
  std::size_t interior_count_ = 0;
  double cell_volume_ = 1.0;
};

/// Real field on the interior nodes of a BoxDomain. The boundary trace is zero
/// by construction.
class GridFunction {
 public:
  explicit GridFunction(BoxDomain domain);
  GridFunction(BoxDomain domain, std::vector<double> values);

  template <class F>
  static GridFunction sample(const BoxDomain& domain, F&& f) {
    GridFunction g(domain);
    for (std::size_t i = 0; i < g.size(); ++i) g.values_[i] = f(domain.node_position(i));
    return g;
  }

  const BoxDomain& domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double max_abs() const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);
  /// this += s * other
  GridFunction& axpy(double s, const GridFunction& other);

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

  Eigen::Map<const Eigen::VectorXd> as_eigen() const {
    return {values_.data(), static_cast<Eigen::Index>(values_.size())};
  }

 private:
  BoxDomain domain_;
  std::vector<double> values_;
};

/// One face-centred array per axis.
class VectorField {
 public:
  explicit VectorField(BoxDomain domain);

  template <class F>
  static VectorField sample(const BoxDomain& domain, F&& f) {
    VectorField q(domain);
    for (int a = 0; a < domain.dim(); ++a) {
      auto& c = q.components_[a];
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = f(domain.face_position(a, i), a);
    }
    return q;
  }

  const BoxDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  std::vector<double>& component(int axis) { return components_[axis]; }
  const std::vector<double>& component(int axis) const { return components_[axis]; }

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s);

 private:
  BoxDomain domain_;
  std::array<std::vector<double>, 3> components_;
};

/// For each face along `axis`, the interior nodes on its low and high side
/// (-1 where the face touches the boundary).
std::vector<std::array<std::ptrdiff_t, 2>> face_nodes(const BoxDomain& domain, int axis);

/// Staggered difference gradient; face values use the zero boundary trace.
VectorField gradient(const GridFunction& u);

/// Negative adjoint of gradient(): inner(divergence(q), v) == -inner_vec(q, gradient(v)).
GridFunction divergence(const VectorField& q);

/// Centred gradient at the nodes, i.e. the average of the two adjacent face
/// gradients. Only used by diagnostics.
std::array<std::vector<double>, 3> nodal_average(const VectorField& q);

double inner(const GridFunction& u, const GridFunction& v);
double inner_vec(const VectorField& q, const VectorField& r);
double l2_norm(const GridFunction& u);
double h1_seminorm(const GridFunction& u);

/// Matrix of -div(grad .) acting on interior values (the 2N+1 point stencil).
Eigen::SparseMatrix<double> dirichlet_laplacian(const BoxDomain& domain);

/// Closed-form first eigenvalue of the discrete Dirichlet Laplacian. Used by
/// checks that need the value independently of poincare_constant().
double discrete_first_eigenvalue(const BoxDomain& domain);

class PoincareError : public std::runtime_error {
 public:
  PoincareError(const std::string& what, GridFunction last_iterate, double last_estimate)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), last_estimate_(last_estimate) {}
  const GridFunction& last_iterate() const { return last_iterate_; }
  double last_estimate() const { return last_estimate_; }

 private:
  GridFunction last_iterate_;
  double last_estimate_;
};

struct PoincareResult {
  double constant;     ///< C_P^h = 1 / lambda_1^h
  double eigenvalue;   ///< lambda_1^h
  int iterations;
  GridFunction eigenfunction;  ///< normalised in L^2
};

/// Inverse power iteration on the discrete Dirichlet Laplacian. Stops when the
/// Rayleigh quotient changes by less than tol (relative).
PoincareResult poincare(const BoxDomain& domain, double tol, int max_iter = 500);

inline double poincare_constant(const BoxDomain& domain, double tol) {
  return poincare(domain, tol).constant;
}

}  // namespace ldrift
