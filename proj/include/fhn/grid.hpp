#pragma once

// Truncated domain [-L, L]^dim with m interior nodes per axis and homogeneous
// Dirichlet closure. Node i sits at x_i = -L + (i+1)*dx, dx = 2L/(m+1).
// 2-D fields are stored x-major: index = ix*m + iy.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fhn/error.hpp"
#include "fhn/format.hpp"
#include "fhn/model.hpp"

namespace fhn {

class Grid {
 public:
  Grid() : Grid(1, 1.0, 3) {}

  static Grid make(int dim, double half_length, int points_per_axis) {
    detail::require_dimension(dim);
    detail::require_finite(half_length, "half_length");
    if (!(half_length > 0.0)) throw DomainError("half_length must be positive");
    if (points_per_axis < 3) throw DomainError("points_per_axis must be >= 3");
    return Grid(dim, half_length, points_per_axis);
  }

  int dim() const { return dim_; }
  double half_length() const { return half_length_; }
  int points_per_axis() const { return m_; }
  double spacing() const { return dx_; }
  std::size_t size() const { return dim_ == 1 ? static_cast<std::size_t>(m_) : static_cast<std::size_t>(m_) * m_; }
  // dx^dim, the quadrature weight of one node
  double cell_volume() const { return dim_ == 1 ? dx_ : dx_ * dx_; }

  double coord(int i) const { return -half_length_ + (i + 1) * dx_; }

  double radius_sq(std::size_t idx) const {
    if (dim_ == 1) {
      const double x = coord(static_cast<int>(idx));
      return x * x;
    }
    const double x = coord(static_cast<int>(idx / m_));
    const double y = coord(static_cast<int>(idx % m_));
    return x * x + y * y;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dim_ == b.dim_ && a.half_length_ == b.half_length_ && a.m_ == b.m_;
  }

 private:
  Grid(int dim, double half_length, int m)
      : dim_(dim), half_length_(half_length), m_(m), dx_(2.0 * half_length / (m + 1)) {}

  int dim_;
  double half_length_;
  int m_;
  double dx_;
};

struct Field {
  Grid grid;
  std::vector<double> values;

  static Field zeros(const Grid& g) { return Field{g, std::vector<double>(g.size(), 0.0)}; }

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const {
    for (double x : values)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

namespace detail {

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw GridMismatch("fields live on different grids");
}

inline void require_on_grid(const Grid& g, const Field& u) {
  require_same_grid(g, u.grid);
  if (u.values.size() != g.size()) throw GridMismatch("field length does not match grid");
}

}  // namespace detail

// out = Lap(u) with ghost values 0. Raw-span form used by the stepper.
inline void laplacian_into(const Grid& g, std::span<const double> u, std::span<double> out) {
  const int m = g.points_per_axis();
  const double inv = 1.0 / (g.spacing() * g.spacing());
  if (g.dim() == 1) {
    for (int i = 0; i < m; ++i) {
      const double l = i > 0 ? u[i - 1] : 0.0;
      const double r = i + 1 < m ? u[i + 1] : 0.0;
      out[i] = (l - 2.0 * u[i] + r) * inv;
    }
    return;
  }
  for (int ix = 0; ix < m; ++ix) {
    for (int iy = 0; iy < m; ++iy) {
      const std::size_t k = static_cast<std::size_t>(ix) * m + iy;
      const double w = ix > 0 ? u[k - m] : 0.0;
      const double e = ix + 1 < m ? u[k + m] : 0.0;
      const double s = iy > 0 ? u[k - 1] : 0.0;
      const double n = iy + 1 < m ? u[k + 1] : 0.0;
      out[k] = (w + e + s + n - 4.0 * u[k]) * inv;
    }
  }
}

inline Field laplacian_apply(const Grid& g, const Field& u) {
  detail::require_on_grid(g, u);
  Field out = Field::zeros(g);
  laplacian_into(g, u.values, out.values);
  return out;
}

inline double inner(const Grid& g, const Field& u, const Field& w) {
  detail::require_on_grid(g, u);
  detail::require_on_grid(g, w);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * w[i];
  return s * g.cell_volume();
}

inline double l2_norm_sq(std::span<const double> u, double cell_volume) {
  double s = 0.0;
  for (double x : u) s += x * x;
  return s * cell_volume;
}

inline double l2_norm_sq(const Grid& g, const Field& u) {
  detail::require_on_grid(g, u);
  return l2_norm_sq(u.values, g.cell_volume());
}

inline double l2_norm(const Grid& g, const Field& u) { return std::sqrt(l2_norm_sq(g, u)); }

// Forward differences over every link, boundary links included, so that
// inner(-Lap u, u) equals this sum up to round-off.
inline double h1_seminorm_sq(const Grid& g, std::span<const double> u) {
  const int m = g.points_per_axis();
  double s = 0.0;
  if (g.dim() == 1) {
    double prev = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d = u[i] - prev;
      s += d * d;
      prev = u[i];
    }
    s += prev * prev;
    return s / g.spacing();  // dx * sum (d/dx)^2
  }
  for (int ix = 0; ix < m; ++ix) {
    double prev = 0.0;
    for (int iy = 0; iy < m; ++iy) {
      const double cur = u[static_cast<std::size_t>(ix) * m + iy];
      s += (cur - prev) * (cur - prev);
      prev = cur;
    }
    s += prev * prev;
  }
  for (int iy = 0; iy < m; ++iy) {
    double prev = 0.0;
    for (int ix = 0; ix < m; ++ix) {
      const double cur = u[static_cast<std::size_t>(ix) * m + iy];
      s += (cur - prev) * (cur - prev);
      prev = cur;
    }
    s += prev * prev;
  }
  return s;  // dx^2 * sum (d/dx)^2 = sum d^2
}

inline double h1_seminorm_sq(const Grid& g, const Field& u) {
  detail::require_on_grid(g, u);
  return h1_seminorm_sq(g, std::span<const double>(u.values));
}

inline double h1_norm_sq(const Grid& g, const Field& u) { return l2_norm_sq(g, u) + h1_seminorm_sq(g, u); }

// Cubic smoothstep cut-off: 0 on [0,1], 1 on [2, inf), C^1, |theta'| <= 1.5.
inline double cutoff_theta(double s) {
  if (std::isnan(s) || s < 0.0) throw DomainError("cutoff_theta requires s >= 0");
  if (s <= 1.0) return 0.0;
  if (s >= 2.0) return 1.0;
  const double r = s - 1.0;
  return r * r * (3.0 - 2.0 * r);
}

inline double cutoff_theta_derivative(double s) {
  if (std::isnan(s) || s < 0.0) throw DomainError("cutoff_theta requires s >= 0");
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double r = s - 1.0;
  return 6.0 * r * (1.0 - r);
}

// dx^dim * sum theta(|x|^2/k^2) (eps u^2 + v^2)
inline double tail_mass(const Grid& g, const Field& u, const Field& v, double k, double epsilon) {
  if (!(k > 0.0)) throw DomainError("tail radius k must be positive");
  detail::require_on_grid(g, u);
  detail::require_on_grid(g, v);
  const double inv_k2 = 1.0 / (k * k);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double th = cutoff_theta(g.radius_sq(i) * inv_k2);
    if (th == 0.0) continue;
    s += th * (epsilon * u[i] * u[i] + v[i] * v[i]);
  }
  return s * g.cell_volume();
}

// Eigenvalue of the 1-D Dirichlet stencil for sin(k*pi*(x+L)/(2L)).
inline double laplacian_eigenvalue_1d(const Grid& g, int k) {
  const double dx = g.spacing();
  return -(2.0 / (dx * dx)) * (1.0 - std::cos(k * std::numbers::pi / (g.points_per_axis() + 1)));
}

inline double laplacian_eigenvalue(const Grid& g, int kx, int ky = 1) {
  if (g.dim() == 1) return laplacian_eigenvalue_1d(g, kx);
  return laplacian_eigenvalue_1d(g, kx) + laplacian_eigenvalue_1d(g, ky);
}

// Discrete eigenvector of the Dirichlet Laplacian (unit amplitude).
inline Field sine_mode(const Grid& g, int kx, int ky = 1) {
  Field f = Field::zeros(g);
  const int m = g.points_per_axis();
  const double c = std::numbers::pi / (m + 1);
  if (g.dim() == 1) {
    for (int i = 0; i < m; ++i) f[i] = std::sin(kx * c * (i + 1));
    return f;
  }
  for (int ix = 0; ix < m; ++ix)
    for (int iy = 0; iy < m; ++iy)
      f[static_cast<std::size_t>(ix) * m + iy] = std::sin(kx * c * (ix + 1)) * std::sin(ky * c * (iy + 1));
  return f;
}

inline Field sample_space_profile(const SpaceProfile& p, const Grid& g) {
  Field f = Field::zeros(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = p.value_at_radius_sq(g.radius_sq(i));
  return f;
}

// a(t) * w(x) at the grid nodes.
inline Field forcing_value(const ForcingSpec& spec, double t, const Grid& g, double sigma) {
  Field f = sample_space_profile(spec.space_profile(), g);
  const double a = spec.time_factor(t, sigma);
  for (double& x : f.values) x *= a;
  return f;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json grid_to_json(const Grid& g) {
  return {{"dim", g.dim()}, {"half_length", g.half_length()}, {"points_per_axis", g.points_per_axis()}};
}

inline Grid grid_from_json(const nlohmann::json& j) {
  return Grid::make(j.at("dim").get<int>(), j.at("half_length").get<double>(), j.at("points_per_axis").get<int>());
}

// CSV: one "# {json grid header}" line, then x[,y],value rows in storage order.
inline void write_field_csv(const std::string& path, const Field& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "# " << grid_to_json(f.grid).dump() << '\n';
  const Grid& g = f.grid;
  const int m = g.points_per_axis();
  if (g.dim() == 1) {
    os << "x,value\n";
    for (int i = 0; i < m; ++i) os << format_double(g.coord(i)) << ',' << format_double(f[i]) << '\n';
  } else {
    os << "x,y,value\n";
    for (int ix = 0; ix < m; ++ix)
      for (int iy = 0; iy < m; ++iy)
        os << format_double(g.coord(ix)) << ',' << format_double(g.coord(iy)) << ','
           << format_double(f[static_cast<std::size_t>(ix) * m + iy]) << '\n';
  }
}

// Binary: JSON header line, then raw native doubles.
inline void write_field_binary(const std::string& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  nlohmann::json header = {{"grid", grid_to_json(f.grid)}, {"count", f.size()}};
  os << header.dump() << '\n';
  os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
}

inline Field read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(is, line);
  const auto header = nlohmann::json::parse(line);
  Field f = Field::zeros(grid_from_json(header.at("grid")));
  is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!is) throw std::runtime_error("truncated field payload in " + path);
  return f;
}

}  // namespace fhn
