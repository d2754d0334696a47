#include "ldrift/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SparseCholesky>

namespace ldrift {

namespace {

void require_same(const BoxDomain& a, const BoxDomain& b) {
  if (!(a == b)) {
    throw DomainMismatch("grid functions live on different domains: " + a.describe() + " vs " +
                         b.describe());
  }
}

// Visits every face of one axis as (face index, left node or -1, right node or -1).
template <class F>
void for_each_face(const BoxDomain& d, int axis, F&& f) {
  const auto& ext = d.interior_extents();
  const auto fext = d.face_extents(axis);
  const std::array<std::size_t, 3> nstride{static_cast<std::size_t>(ext[1]) * ext[2],
                                           static_cast<std::size_t>(ext[2]), 1};
  std::size_t face = 0;
  for (int i = 0; i < fext[0]; ++i) {
    for (int j = 0; j < fext[1]; ++j) {
      for (int k = 0; k < fext[2]; ++k, ++face) {
        std::array<int, 3> idx{i, j, k};
        const int along = idx[axis];
        // Face `along` sits between interior nodes along-1 and along.
        std::ptrdiff_t left = -1;
        std::ptrdiff_t right = -1;
        idx[axis] = along - 1;
        if (along >= 1) {
          left = static_cast<std::ptrdiff_t>(idx[0] * nstride[0] + idx[1] * nstride[1] + idx[2]);
        }
        idx[axis] = along;
        if (along <= ext[axis] - 1) {
          right = static_cast<std::ptrdiff_t>(idx[0] * nstride[0] + idx[1] * nstride[1] + idx[2]);
        }
        f(face, left, right);
      }
    }
  }
}

}  // namespace

BoxDomain::BoxDomain(std::vector<double> lengths, std::vector<int> cells) : dim_(static_cast<int>(lengths.size())) {
  if (dim_ < 1 || dim_ > kMaxDim) throw std::invalid_argument("domain dimension must be 1, 2 or 3");
  if (cells.size() != lengths.size()) throw std::invalid_argument("lengths and cells differ in size");
  interior_count_ = 1;
  for (int a = 0; a < dim_; ++a) {
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a])) {
      throw std::invalid_argument("domain lengths must be positive and finite");
    }
    if (cells[a] < 2) throw std::invalid_argument("each axis needs at least 2 cells");
    lengths_[a] = lengths[a];
    cells_[a] = cells[a];
    widths_[a] = lengths[a] / cells[a];
    ext_[a] = cells[a] - 1;
    interior_count_ *= static_cast<std::size_t>(ext_[a]);
    cell_volume_ *= widths_[a];
  }
  for (int a = 0; a < dim_; ++a) {
    std::size_t n = 1;
    for (int e = 0; e < dim_; ++e) n *= static_cast<std::size_t>(e == a ? cells_[e] : ext_[e]);
    face_count_[a] = n;
  }
}

BoxDomain BoxDomain::cube(int dim, double length, int cells) {
  return BoxDomain(std::vector<double>(dim, length), std::vector<int>(dim, cells));
}

double BoxDomain::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= lengths_[a];
  return v;
}

double BoxDomain::diameter() const {
  double s = 0.0;
  for (int a = 0; a < dim_; ++a) s += lengths_[a] * lengths_[a];
  return std::sqrt(s);
}

std::array<int, 3> BoxDomain::face_extents(int axis) const {
  auto f = ext_;
  f[axis] = cells_[axis];
  return f;
}

Point BoxDomain::node_position(std::size_t flat) const {
  Point x{};
  const std::size_t s1 = static_cast<std::size_t>(ext_[2]);
  const std::size_t s0 = static_cast<std::size_t>(ext_[1]) * s1;
  const std::array<std::size_t, 3> idx{flat / s0, (flat / s1) % ext_[1], flat % s1};
  for (int a = 0; a < dim_; ++a) x[a] = static_cast<double>(idx[a] + 1) * widths_[a];
  return x;
}

Point BoxDomain::face_position(int axis, std::size_t flat) const {
  const auto f = face_extents(axis);
  const std::size_t s1 = static_cast<std::size_t>(f[2]);
  const std::size_t s0 = static_cast<std::size_t>(f[1]) * s1;
  const std::array<std::size_t, 3> idx{flat / s0, (flat / s1) % f[1], flat % s1};
  Point x{};
  for (int a = 0; a < dim_; ++a) {
    x[a] = a == axis ? (static_cast<double>(idx[a]) + 0.5) * widths_[a]
                     : static_cast<double>(idx[a] + 1) * widths_[a];
  }
  return x;
}

std::string BoxDomain::describe() const {
  std::ostringstream os;
  os << "box[";
  for (int a = 0; a < dim_; ++a) os << (a ? " x " : "") << lengths_[a] << "/" << cells_[a];
  os << "]";
  return os.str();
}

std::vector<std::array<std::ptrdiff_t, 2>> face_nodes(const BoxDomain& d, int axis) {
  std::vector<std::array<std::ptrdiff_t, 2>> out(d.face_count(axis));
  for_each_face(d, axis, [&](std::size_t f, std::ptrdiff_t l, std::ptrdiff_t r) { out[f] = {l, r}; });
  return out;
}

GridFunction::GridFunction(BoxDomain domain)
    : domain_(std::move(domain)), values_(domain_.interior_count(), 0.0) {}

GridFunction::GridFunction(BoxDomain domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (values_.size() != domain_.interior_count()) {
    throw std::invalid_argument("value count does not match the interior node count");
  }
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) { return axpy(1.0, other); }
GridFunction& GridFunction::operator-=(const GridFunction& other) { return axpy(-1.0, other); }

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridFunction& GridFunction::axpy(double s, const GridFunction& other) {
  require_same(domain_, other.domain_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
  return *this;
}

VectorField::VectorField(BoxDomain domain) : domain_(std::move(domain)) {
  for (int a = 0; a < domain_.dim(); ++a) components_[a].assign(domain_.face_count(a), 0.0);
}

VectorField& VectorField::operator+=(const VectorField& other) {
  require_same(domain_, other.domain_);
  for (int a = 0; a < dim(); ++a) {
    for (std::size_t i = 0; i < components_[a].size(); ++i) components_[a][i] += other.components_[a][i];
  }
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  require_same(domain_, other.domain_);
  for (int a = 0; a < dim(); ++a) {
    for (std::size_t i = 0; i < components_[a].size(); ++i) components_[a][i] -= other.components_[a][i];
  }
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (int a = 0; a < dim(); ++a) {
    for (double& v : components_[a]) v *= s;
  }
  return *this;
}

VectorField gradient(const GridFunction& u) {
  const auto& d = u.domain();
  VectorField q(d);
  for (int a = 0; a < d.dim(); ++a) {
    auto& c = q.component(a);
    const double inv_h = 1.0 / d.width(a);
    for_each_face(d, a, [&](std::size_t f, std::ptrdiff_t l, std::ptrdiff_t r) {
      const double ur = r >= 0 ? u[r] : 0.0;
      const double ul = l >= 0 ? u[l] : 0.0;
      c[f] = (ur - ul) * inv_h;
    });
  }
  return q;
}

GridFunction divergence(const VectorField& q) {
  const auto& d = q.domain();
  GridFunction out(d);
  for (int a = 0; a < d.dim(); ++a) {
    const auto& c = q.component(a);
    const double inv_h = 1.0 / d.width(a);
    for_each_face(d, a, [&](std::size_t f, std::ptrdiff_t l, std::ptrdiff_t r) {
      // Face f is the right face of node l and the left face of node r.
      if (l >= 0) out[l] += c[f] * inv_h;
      if (r >= 0) out[r] -= c[f] * inv_h;
    });
  }
  return out;
}

std::array<std::vector<double>, 3> nodal_average(const VectorField& q) {
  const auto& d = q.domain();
  std::array<std::vector<double>, 3> out;
  for (int a = 0; a < d.dim(); ++a) {
    out[a].assign(d.interior_count(), 0.0);
    const auto& c = q.component(a);
    for_each_face(d, a, [&](std::size_t f, std::ptrdiff_t l, std::ptrdiff_t r) {
      if (l >= 0) out[a][l] += 0.5 * c[f];
      if (r >= 0) out[a][r] += 0.5 * c[f];
    });
  }
  return out;
}

double inner(const GridFunction& u, const GridFunction& v) {
  require_same(u.domain(), v.domain());
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s * u.domain().cell_volume();
}

double inner_vec(const VectorField& q, const VectorField& r) {
  require_same(q.domain(), r.domain());
  double s = 0.0;
  for (int a = 0; a < q.dim(); ++a) {
    const auto& x = q.component(a);
    const auto& y = r.component(a);
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  }
  return s * q.domain().cell_volume();
}

double l2_norm(const GridFunction& u) { return std::sqrt(inner(u, u)); }

double h1_seminorm(const GridFunction& u) {
  const auto g = gradient(u);
  return std::sqrt(inner_vec(g, g));
}

Eigen::SparseMatrix<double> dirichlet_laplacian(const BoxDomain& d) {
  const auto n = static_cast<Eigen::Index>(d.interior_count());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (2 * d.dim() + 1));
  for (int a = 0; a < d.dim(); ++a) {
    const double w = 1.0 / (d.width(a) * d.width(a));
    for_each_face(d, a, [&](std::size_t, std::ptrdiff_t l, std::ptrdiff_t r) {
      if (l >= 0) trip.emplace_back(l, l, w);
      if (r >= 0) trip.emplace_back(r, r, w);
      if (l >= 0 && r >= 0) {
        trip.emplace_back(l, r, -w);
        trip.emplace_back(r, l, -w);
      }
    });
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

double discrete_first_eigenvalue(const BoxDomain& d) {
  double lam = 0.0;
  for (int a = 0; a < d.dim(); ++a) {
    const double h = d.width(a);
    const double s = std::sin(std::numbers::pi * h / (2.0 * d.length(a)));
    lam += 4.0 / (h * h) * s * s;
  }
  return lam;
}

PoincareResult poincare(const BoxDomain& domain, double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("poincare: tol must be positive");
  const auto lap = dirichlet_laplacian(domain);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(lap);
  if (chol.info() != Eigen::Success) throw std::runtime_error("poincare: Laplacian factorisation failed");

  // Start from a positive vector; the first eigenvector is positive, so the
  // overlap is nonzero.
  Eigen::VectorXd x = Eigen::VectorXd::Ones(lap.rows());
  x.normalize();
  double estimate = x.dot(lap * x);
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd y = chol.solve(x);
    y.normalize();
    const double next = y.dot(lap * y);
    x = std::move(y);
    if (std::abs(next - estimate) <= tol * std::abs(next)) {
      GridFunction ef(domain, std::vector<double>(x.data(), x.data() + x.size()));
      ef *= 1.0 / l2_norm(ef);
      return {1.0 / next, next, it, std::move(ef)};
    }
    estimate = next;
  }
  throw PoincareError("poincare: inverse iteration did not converge",
                      GridFunction(domain, std::vector<double>(x.data(), x.data() + x.size())), estimate);
}

}  // namespace ldrift
