#include "logsac/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

namespace logsac {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::complex<double>>& complex_scratch(std::size_t n) {
  thread_local std::vector<std::complex<double>> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

std::vector<double>& real_scratch(std::size_t n) {
  thread_local std::vector<double> buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

std::string to_string(Boundary bc) { return bc == Boundary::Periodic ? "periodic" : "neumann"; }

Boundary boundary_from_string(const std::string& name) {
  if (name == "periodic") return Boundary::Periodic;
  if (name == "neumann") return Boundary::Neumann;
  throw std::invalid_argument("unknown boundary condition '" + name + "' (expected periodic or neumann)");
}

void Spectrum::set_zero() { std::fill(coeffs.begin(), coeffs.end(), std::complex<double>{}); }

Spectrum& Spectrum::operator+=(const Spectrum& other) {
  if (other.n != n) throw std::invalid_argument("spectrum shape mismatch");
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += other.coeffs[i];
  return *this;
}

Spectrum& Spectrum::operator*=(double s) {
  for (auto& c : coeffs) c *= s;
  return *this;
}

DegenerateDenominator::DegenerateDenominator(int p, int q, double denominator)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "degenerate implicit denominator " << denominator << " at mode position (" << p << ", " << q
           << ")";
        return os.str();
      }()),
      p_(p),
      q_(q),
      denominator_(denominator) {}

struct SpectralBasis::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

SpectralBasis::SpectralBasis(Boundary bc, int n_modes, int grid_points)
    : bc_(bc), n_(n_modes), m_(grid_points == 0 ? n_modes : grid_points), plans_(std::make_unique<Plans>()) {
  if (n_ < 1) throw std::invalid_argument("spectral basis needs at least one mode per dimension");
  if (m_ < n_) throw std::invalid_argument("grid points per dimension must be >= mode count");
  if (bc_ == Boundary::Periodic && n_ % 2 != 0) {
    throw std::invalid_argument("periodic basis requires an even mode count");
  }

  eigenvalues_.resize(mode_count());
  retained_.assign(mode_count(), 1);
  for (int p = 0; p < n_; ++p) {
    for (int q = 0; q < n_; ++q) {
      const std::size_t idx = static_cast<std::size_t>(p) * n_ + q;
      eigenvalues_[idx] = eigenvalue_1d(p) + eigenvalue_1d(q);
      if (bc_ == Boundary::Periodic && m_ > n_ && (p == n_ / 2 || q == n_ / 2)) retained_[idx] = 0;
    }
  }

  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_MEASURE | FFTW_UNALIGNED;
  if (bc_ == Boundary::Periodic) {
    std::vector<std::complex<double>> buf(grid_size());
    plans_->forward = fftw_plan_dft_2d(m_, m_, as_fftw(buf.data()), as_fftw(buf.data()), FFTW_FORWARD, flags);
    plans_->backward = fftw_plan_dft_2d(m_, m_, as_fftw(buf.data()), as_fftw(buf.data()), FFTW_BACKWARD, flags);
  } else {
    std::vector<double> buf(grid_size());
    plans_->forward = fftw_plan_r2r_2d(m_, m_, buf.data(), buf.data(), FFTW_REDFT10, FFTW_REDFT10, flags);
    plans_->backward = fftw_plan_r2r_2d(m_, m_, buf.data(), buf.data(), FFTW_REDFT01, FFTW_REDFT01, flags);
  }
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("FFTW planning failed");
}

SpectralBasis::~SpectralBasis() = default;

std::shared_ptr<const SpectralBasis> SpectralBasis::create(Boundary bc, int n_modes, bool dealias) {
  const int m = dealias ? (3 * n_modes + 1) / 2 : n_modes;
  return std::make_shared<const SpectralBasis>(bc, n_modes, m);
}

double SpectralBasis::side_length() const { return bc_ == Boundary::Periodic ? 2.0 * kPi : 2.0; }

double SpectralBasis::origin() const { return bc_ == Boundary::Periodic ? 0.0 : -1.0; }

std::vector<double> SpectralBasis::coordinates() const {
  std::vector<double> x(static_cast<std::size_t>(m_));
  const double h = cell_width();
  for (int i = 0; i < m_; ++i) {
    x[static_cast<std::size_t>(i)] = bc_ == Boundary::Periodic ? h * i : -1.0 + h * (i + 0.5);
  }
  return x;
}

int SpectralBasis::wavenumber(int p) const {
  if (bc_ == Boundary::Neumann) return p;
  return p < n_ / 2 ? p : p - n_;
}

int SpectralBasis::position(int k) const {
  if (bc_ == Boundary::Neumann) return (k >= 0 && k < n_) ? k : -1;
  if (k < -n_ / 2 || k >= n_ / 2) return -1;
  return k >= 0 ? k : k + n_;
}

double SpectralBasis::eigenvalue_1d(int p) const {
  const double k = wavenumber(p);
  return bc_ == Boundary::Periodic ? k * k : (k * kPi / 2.0) * (k * kPi / 2.0);
}

std::complex<double> SpectralBasis::basis_1d(int p, double x) const {
  const int k = wavenumber(p);
  if (bc_ == Boundary::Periodic) {
    return std::polar(1.0 / std::sqrt(2.0 * kPi), k * x);
  }
  if (k == 0) return {1.0 / std::sqrt(2.0), 0.0};
  return {std::cos(k * kPi * (x + 1.0) / 2.0), 0.0};
}

void SpectralBasis::to_spectrum(std::span<const double> grid, Spectrum& out) const {
  if (grid.size() != grid_size()) throw std::invalid_argument("grid size does not match basis");
  if (out.n != n_) out = Spectrum(n_);
  const std::size_t m = static_cast<std::size_t>(m_);

  if (bc_ == Boundary::Periodic) {
    auto& buf = complex_scratch(grid_size());
    for (std::size_t i = 0; i < grid_size(); ++i) buf[i] = grid[i];
    fftw_execute_dft(plans_->forward, as_fftw(buf.data()), as_fftw(buf.data()));
    const double scale = 2.0 * kPi / (static_cast<double>(m_) * m_);
    for (int p = 0; p < n_; ++p) {
      const std::size_t ix = static_cast<std::size_t>((wavenumber(p) + m_) % m_);
      for (int q = 0; q < n_; ++q) {
        const std::size_t iy = static_cast<std::size_t>((wavenumber(q) + m_) % m_);
        out(p, q) = retained(p, q) ? scale * buf[ix * m + iy] : std::complex<double>{};
      }
    }
    return;
  }

  auto& buf = real_scratch(grid_size());
  std::copy(grid.begin(), grid.end(), buf.begin());
  fftw_execute_r2r(plans_->forward, buf.data(), buf.data());
  const double scale = 1.0 / (static_cast<double>(m_) * m_);
  const double w0 = 1.0 / std::sqrt(2.0);
  for (int p = 0; p < n_; ++p) {
    const double wp = p == 0 ? w0 : 1.0;
    for (int q = 0; q < n_; ++q) {
      const double wq = q == 0 ? w0 : 1.0;
      out(p, q) = scale * wp * wq * buf[static_cast<std::size_t>(p) * m + q];
    }
  }
}

void SpectralBasis::fill_complex_buffer(const Spectrum& in, std::complex<double>* buf) const {
  const std::size_t m = static_cast<std::size_t>(m_);
  std::fill(buf, buf + grid_size(), std::complex<double>{});
  for (int p = 0; p < n_; ++p) {
    const std::size_t ix = static_cast<std::size_t>((wavenumber(p) + m_) % m_);
    for (int q = 0; q < n_; ++q) {
      if (!retained(p, q)) continue;
      const std::size_t iy = static_cast<std::size_t>((wavenumber(q) + m_) % m_);
      buf[ix * m + iy] = in(p, q);
    }
  }
  fftw_execute_dft(plans_->backward, as_fftw(buf), as_fftw(buf));
}

void SpectralBasis::to_grid(const Spectrum& in, std::span<double> grid) const {
  if (in.n != n_) throw std::invalid_argument("spectrum shape does not match basis");
  if (grid.size() != grid_size()) throw std::invalid_argument("grid size does not match basis");
  const std::size_t m = static_cast<std::size_t>(m_);

  if (bc_ == Boundary::Periodic) {
    auto& buf = complex_scratch(grid_size());
    fill_complex_buffer(in, buf.data());
    const double scale = 1.0 / (2.0 * kPi);
    for (std::size_t i = 0; i < grid_size(); ++i) grid[i] = scale * buf[i].real();
    return;
  }

  auto& buf = real_scratch(grid_size());
  std::fill(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(grid_size()), 0.0);
  const double w0 = 1.0 / std::sqrt(2.0);
  for (int p = 0; p < n_; ++p) {
    const double fp = p == 0 ? w0 : 0.5;
    for (int q = 0; q < n_; ++q) {
      const double fq = q == 0 ? w0 : 0.5;
      buf[static_cast<std::size_t>(p) * m + q] = fp * fq * in(p, q).real();
    }
  }
  fftw_execute_r2r(plans_->backward, buf.data(), buf.data());
  std::copy(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(grid_size()), grid.begin());
}

double SpectralBasis::synthesis_imaginary_residue(const Spectrum& in) const {
  if (bc_ == Boundary::Neumann) {
    double r = 0.0;
    for (const auto& c : in.coeffs) r = std::max(r, std::abs(c.imag()));
    return r;
  }
  auto& buf = complex_scratch(grid_size());
  fill_complex_buffer(in, buf.data());
  double r = 0.0;
  for (std::size_t i = 0; i < grid_size(); ++i) r = std::max(r, std::abs(buf[i].imag()));
  return r / (2.0 * kPi);
}

void SpectralBasis::enforce_real(Spectrum& s) const {
  if (s.n != n_) throw std::invalid_argument("spectrum shape does not match basis");
  if (bc_ == Boundary::Neumann) {
    for (auto& c : s.coeffs) c.imag(0.0);
    return;
  }
  for (int p = 0; p < n_; ++p) {
    const int pp = (n_ - p) % n_;
    for (int q = 0; q < n_; ++q) {
      const int qq = (n_ - q) % n_;
      const std::size_t i = static_cast<std::size_t>(p) * n_ + q;
      const std::size_t j = static_cast<std::size_t>(pp) * n_ + qq;
      if (i == j) {
        s.coeffs[i].imag(0.0);
      } else if (i < j) {
        const std::complex<double> avg = 0.5 * (s.coeffs[i] + std::conj(s.coeffs[j]));
        s.coeffs[i] = avg;
        s.coeffs[j] = std::conj(avg);
      }
    }
  }
}

// ---------------------------------------------------------------------------

Field::Field(BasisPtr basis)
    : basis_(std::move(basis)),
      values_(basis_->grid_size(), 0.0),
      spectrum_(basis_->modes()),
      grid_valid_(true),
      spectrum_valid_(true) {}

Field Field::from_grid(BasisPtr basis, std::vector<double> values) {
  if (values.size() != basis->grid_size()) throw std::invalid_argument("grid size does not match basis");
  Field f;
  f.basis_ = std::move(basis);
  f.values_ = std::move(values);
  f.grid_valid_ = true;
  f.spectrum_valid_ = false;
  return f;
}

Field Field::from_spectrum(BasisPtr basis, Spectrum coeffs) {
  if (coeffs.n != basis->modes()) throw std::invalid_argument("spectrum shape does not match basis");
  Field f;
  f.basis_ = std::move(basis);
  f.spectrum_ = std::move(coeffs);
  f.spectrum_valid_ = true;
  f.grid_valid_ = false;
  return f;
}

Field Field::constant(BasisPtr basis, double value) {
  const std::size_t n = basis->grid_size();
  return from_grid(std::move(basis), std::vector<double>(n, value));
}

void Field::sync_grid() const {
  if (grid_valid_) return;
  values_.resize(basis_->grid_size());
  basis_->to_grid(spectrum_, values_);
  grid_valid_ = true;
}

void Field::sync_spectrum() const {
  if (spectrum_valid_) return;
  basis_->to_spectrum(values_, spectrum_);
  spectrum_valid_ = true;
}

std::span<const double> Field::values() const {
  sync_grid();
  return values_;
}

const Spectrum& Field::spectrum() const {
  sync_spectrum();
  return spectrum_;
}

std::span<double> Field::mutable_values() {
  sync_grid();
  spectrum_valid_ = false;
  return values_;
}

Spectrum& Field::mutable_spectrum() {
  sync_spectrum();
  grid_valid_ = false;
  return spectrum_;
}

// ---------------------------------------------------------------------------

Spectrum forward(const Field& field) {
  for (double v : field.values()) {
    if (!std::isfinite(v)) throw std::domain_error("forward transform of a field with non-finite values");
  }
  return field.spectrum();
}

Field inverse(const Spectrum& coeffs, BasisPtr basis) {
  if (coeffs.n != basis->modes() || coeffs.size() != basis->mode_count()) {
    throw std::invalid_argument("spectrum shape does not match basis");
  }
  return Field::from_spectrum(std::move(basis), coeffs);
}

void project_in_place(Spectrum& coeffs, const SpectralBasis& basis, int n) {
  if (n < 1) throw std::invalid_argument("projection needs at least one mode");
  if (n > basis.modes()) throw std::invalid_argument("projection beyond the basis mode count");
  auto kept = [&](int p) {
    const int k = basis.wavenumber(p);
    if (basis.bc() == Boundary::Neumann) return k < n;
    // Below the full basis the unpaired -n/2 mode is dropped as well, so real
    // fields stay real.
    if (n == basis.modes()) return true;
    return std::abs(k) <= (n - 1) / 2;
  };
  for (int p = 0; p < coeffs.n; ++p) {
    const bool kp = kept(p);
    for (int q = 0; q < coeffs.n; ++q) {
      if (!kp || !kept(q)) coeffs(p, q) = 0.0;
    }
  }
}

Field project(const Field& field, int n) {
  Spectrum s = field.spectrum();
  project_in_place(s, field.basis(), n);
  return Field::from_spectrum(field.basis_ptr(), std::move(s));
}

Field implicit_solve(const Field& rhs, double sigma, double shift, double tau) {
  const SpectralBasis& basis = rhs.basis();
  Spectrum s = rhs.spectrum();
  for (int p = 0; p < s.n; ++p) {
    for (int q = 0; q < s.n; ++q) {
      const double denom = 1.0 + tau * (sigma * basis.eigenvalue(p, q) + shift);
      if (!(denom > 1e-12)) throw DegenerateDenominator(p, q, denom);
      s(p, q) /= denom;
    }
  }
  return Field::from_spectrum(rhs.basis_ptr(), std::move(s));
}

Spectrum apply_laplacian(const Spectrum& coeffs, const SpectralBasis& basis) {
  Spectrum out = coeffs;
  for (std::size_t i = 0; i < out.size(); ++i) out.coeffs[i] *= -basis.eigenvalues()[i];
  return out;
}

double grad_norm_sq(const Spectrum& coeffs, const SpectralBasis& basis) {
  double sum = 0.0;
  const auto lambda = basis.eigenvalues();
  for (std::size_t i = 0; i < coeffs.size(); ++i) sum += lambda[i] * std::norm(coeffs.coeffs[i]);
  return sum;
}

double grad_norm_sq(const Field& field) { return grad_norm_sq(field.spectrum(), field.basis()); }

double l2_norm_sq(const Spectrum& coeffs) {
  double sum = 0.0;
  for (const auto& c : coeffs.coeffs) sum += std::norm(c);
  return sum;
}

double grid_l2_norm_sq(const Field& field) {
  double sum = 0.0;
  for (double v : field.values()) sum += v * v;
  return sum * field.basis().cell_area();
}

double sup_norm(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) {
    const double a = std::abs(v);
    if (std::isnan(a)) return std::numeric_limits<double>::infinity();
    m = std::max(m, a);
  }
  return m;
}

double sup_norm(const Field& field) { return sup_norm(field.values()); }

}  // namespace logsac
