#pragma once

// Laplacian eigenbasis spectral Galerkin machinery on the two fixed domains:
//   Periodic  on (0, 2pi)^2, e_{k,l} = exp(i(kx + ly)) / (2 pi),
//             k, l in {-N/2, ..., N/2 - 1}, lambda = k^2 + l^2;
//   Neumann   on (-1, 1)^2,  e_{k,l} = phi_k(x) phi_l(y),
//             phi_0 = 1/sqrt(2), phi_k = cos(k pi (x + 1) / 2),
//             k, l in {0, ..., N - 1}, lambda = (k pi / 2)^2 + (l pi / 2)^2.
//
// Grid values live on an M x M tensor grid (M = N by default, 3N/2 when
// dealiasing). Periodic grids are x_i = 2 pi i / M; Neumann grids are the
// cell centres x_i = -1 + (2i + 1) / M, on which the cosine transform is
// exactly orthogonal. All arrays are row-major with the x index first.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace logsac {

enum class Boundary { Periodic, Neumann };

std::string to_string(Boundary bc);
Boundary boundary_from_string(const std::string& name);

/// Expansion coefficients in the orthonormal eigenbasis, N x N, indexed by
/// storage position (p, q). For the periodic basis position p carries the
/// signed wavenumber p < N/2 ? p : p - N; for the Neumann basis it is p itself.
/// Neumann coefficients are real and stored with zero imaginary part.
struct Spectrum {
  int n = 0;
  std::vector<std::complex<double>> coeffs;

  Spectrum() = default;
  explicit Spectrum(int modes) : n(modes), coeffs(static_cast<std::size_t>(modes) * modes) {}

  std::complex<double>& operator()(int p, int q) { return coeffs[static_cast<std::size_t>(p) * n + q]; }
  const std::complex<double>& operator()(int p, int q) const {
    return coeffs[static_cast<std::size_t>(p) * n + q];
  }
  std::size_t size() const { return coeffs.size(); }
  void set_zero();

  Spectrum& operator+=(const Spectrum& other);
  Spectrum& operator*=(double s);
};

/// Raised when an implicit solve would divide by a (near) zero denominator.
class DegenerateDenominator : public std::runtime_error {
 public:
  DegenerateDenominator(int p, int q, double denominator);
  int p() const { return p_; }
  int q() const { return q_; }
  double denominator() const { return denominator_; }

 private:
  int p_;
  int q_;
  double denominator_;
};

/// Eigenvalues, grid geometry and transform plans for one (bc, N, M) triple.
/// Immutable after construction and safe to share between threads.
class SpectralBasis {
 public:
  /// grid_points = 0 selects M = N; `dealias` selects M = 3N/2 instead.
  SpectralBasis(Boundary bc, int n_modes, int grid_points = 0);
  ~SpectralBasis();
  SpectralBasis(const SpectralBasis&) = delete;
  SpectralBasis& operator=(const SpectralBasis&) = delete;

  static std::shared_ptr<const SpectralBasis> create(Boundary bc, int n_modes, bool dealias = false);

  Boundary bc() const { return bc_; }
  int modes() const { return n_; }
  int grid_points() const { return m_; }
  std::size_t mode_count() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t grid_size() const { return static_cast<std::size_t>(m_) * m_; }

  /// Side length of the square domain (2 pi or 2).
  double side_length() const;
  double domain_area() const { return side_length() * side_length(); }
  /// Quadrature weight of one grid cell, h^2.
  double cell_area() const { return cell_width() * cell_width(); }
  double cell_width() const { return side_length() / m_; }
  /// Lower-left corner of the domain (0 or -1).
  double origin() const;
  /// 1-D grid coordinates.
  std::vector<double> coordinates() const;

  /// Signed (periodic) or plain (Neumann) mode integer at storage position p.
  int wavenumber(int p) const;
  /// Storage position of a mode integer, or -1 when it is not represented.
  int position(int k) const;
  /// One-dimensional eigenvalue of the mode at storage position p.
  double eigenvalue_1d(int p) const;
  double eigenvalue(int p, int q) const { return eigenvalues_[static_cast<std::size_t>(p) * n_ + q]; }
  std::span<const double> eigenvalues() const { return eigenvalues_; }

  /// False for modes removed from the retained set (the periodic Nyquist
  /// row and column when M > N).
  bool retained(int p, int q) const { return retained_[static_cast<std::size_t>(p) * n_ + q] != 0; }

  /// Value of the 1-D orthonormal basis function at storage position p.
  std::complex<double> basis_1d(int p, double x) const;
  /// Value of e_{p,q}(x, y).
  std::complex<double> basis_function(int p, int q, double x, double y) const {
    return basis_1d(p, x) * basis_1d(q, y);
  }

  /// Grid values -> truncated coefficients. No finiteness check.
  void to_spectrum(std::span<const double> grid, Spectrum& out) const;
  /// Coefficients -> grid values (real part for the periodic basis).
  void to_grid(const Spectrum& in, std::span<double> grid) const;
  /// Imaginary residue of the periodic synthesis, max |Im u(x)|; 0 for Neumann.
  double synthesis_imaginary_residue(const Spectrum& in) const;
  /// Projects coefficients onto real fields: c(-k,-l) = conj(c(k,l)) for the
  /// periodic basis, zero imaginary parts for Neumann. The discarded part is
  /// invisible on the grid, so steppers call this to stop round-off in it from
  /// being amplified by the implicit linear terms.
  void enforce_real(Spectrum& s) const;

  bool same_as(const SpectralBasis& other) const {
    return bc_ == other.bc_ && n_ == other.n_ && m_ == other.m_;
  }

 private:
  struct Plans;

  void fill_complex_buffer(const Spectrum& in, std::complex<double>* buf) const;

  Boundary bc_;
  int n_;
  int m_;
  std::vector<double> eigenvalues_;
  std::vector<unsigned char> retained_;
  std::unique_ptr<Plans> plans_;
};

using BasisPtr = std::shared_ptr<const SpectralBasis>;

/// Scalar field with paired grid and spectral representations. Whichever side
/// was written last is authoritative; the other is synchronized on access.
class Field {
 public:
  Field() = default;
  explicit Field(BasisPtr basis);

  static Field from_grid(BasisPtr basis, std::vector<double> values);
  static Field from_spectrum(BasisPtr basis, Spectrum coeffs);
  static Field constant(BasisPtr basis, double value);

  const SpectralBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  bool valid() const { return static_cast<bool>(basis_); }

  std::span<const double> values() const;
  const Spectrum& spectrum() const;

  /// Mutable access to one side invalidates the other.
  std::span<double> mutable_values();
  Spectrum& mutable_spectrum();

 private:
  void sync_grid() const;
  void sync_spectrum() const;

  BasisPtr basis_;
  mutable std::vector<double> values_;
  mutable Spectrum spectrum_;
  mutable bool grid_valid_ = false;
  mutable bool spectrum_valid_ = false;
};

/// Orthonormal-basis coefficients of a field. Throws std::domain_error if any
/// grid value is non-finite.
Spectrum forward(const Field& field);

/// Field synthesized from coefficients; throws std::invalid_argument if the
/// coefficient shape does not match the basis.
Field inverse(const Spectrum& coeffs, BasisPtr basis);

/// Zeroes every coefficient whose x or y mode lies outside the first n modes of
/// the basis ordering. Idempotent. For the periodic basis with n < N the kept
/// wavenumbers are |k| <= (n - 1) / 2, which keeps real fields real.
void project_in_place(Spectrum& coeffs, const SpectralBasis& basis, int n);
Field project(const Field& field, int n);

/// Per-mode division by 1 + tau (sigma lambda + shift).
Field implicit_solve(const Field& rhs, double sigma, double shift, double tau);

/// Applies the spectral Laplacian: coefficient-wise multiplication by -lambda.
Spectrum apply_laplacian(const Spectrum& coeffs, const SpectralBasis& basis);

/// Spectral Dirichlet form sum lambda |u_hat|^2 = ||grad u||^2.
double grad_norm_sq(const Field& field);
double grad_norm_sq(const Spectrum& coeffs, const SpectralBasis& basis);

/// sum |u_hat|^2 = ||u||^2 for band-limited fields.
double l2_norm_sq(const Spectrum& coeffs);

/// Grid quadrature of u^2.
double grid_l2_norm_sq(const Field& field);

/// max |u| over grid values.
double sup_norm(const Field& field);
double sup_norm(std::span<const double> values);

}  // namespace logsac
