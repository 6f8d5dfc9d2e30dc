#pragma once

// Configuration-space grids and the fields that live on them.
//
// Physical space is one periodic axis per particle; configuration space is
// the N-fold product. Fields are stored row-major with axis 0 slowest.
// All integrals are Riemann sums with weight dx^N.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qwo {

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxParticles = 4;

// Positions of all particles; only the first n_particles entries are used.
using Config = std::array<double, kMaxParticles>;

class GridSpec {
public:
    GridSpec(std::size_t n_particles, std::size_t cells_per_axis, double axis_length,
             double origin = 0.0);

    std::size_t n_particles() const { return n_particles_; }
    std::size_t cells() const { return cells_; }
    double length() const { return length_; }
    double origin() const { return origin_; }
    double dx() const { return length_ / static_cast<double>(cells_); }
    std::size_t size() const { return size_; }
    // dx^N, the configuration-space volume element.
    double cell_volume() const { return cell_volume_; }

    double position(std::size_t j) const { return origin_ + static_cast<double>(j) * dx(); }
    // Angular wavenumber of FFT bin j (Nyquist bin maps to -pi/dx).
    double wavenumber(std::size_t j) const;
    // Row-major stride of an axis.
    std::size_t stride(std::size_t axis) const;
    std::array<std::size_t, kMaxParticles> unravel(std::size_t flat) const;

    // Maps x into [origin, origin + L).
    double wrap(double x) const;
    // Minimal-image displacement a - b in [-L/2, L/2).
    double periodic_delta(double a, double b) const;

    std::vector<std::size_t> shape() const { return std::vector<std::size_t>(n_particles_, cells_); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    std::size_t n_particles_;
    std::size_t cells_;
    double length_;
    double origin_;
    std::size_t size_;
    double cell_volume_;
};

class ComplexField {
public:
    explicit ComplexField(GridSpec grid);  // zero field
    ComplexField(GridSpec grid, std::vector<cplx> values);

    const GridSpec& grid() const { return grid_; }
    std::span<const cplx> values() const { return values_; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    // Moves the storage out, leaving this field empty.
    std::vector<cplx> release() && { return std::move(values_); }

    ComplexField scaled(cplx c) const;
    // Returns psi / ||psi||; throws on a zero field.
    ComplexField normalized() const;

private:
    GridSpec grid_;
    std::vector<cplx> values_;
};

// Samples on a periodic 1D axis; cell j is centred on origin + j*dx.
struct RealField1D {
    std::size_t cells = 0;
    double length = 0.0;
    double origin = 0.0;
    std::vector<double> values;

    RealField1D() = default;
    RealField1D(std::size_t cells_, double length_, double origin_, std::vector<double> values_);

    double dx() const { return length / static_cast<double>(cells); }
    double position(std::size_t j) const { return origin + static_cast<double>(j) * dx(); }
    double total() const;  // Riemann sum * dx
};

RealField1D physical_axis(const GridSpec& grid, std::vector<double> values);

// <a|b> with the dx^N measure; conjugate-linear in a.
cplx inner(const ComplexField& a, const ComplexField& b);
double norm(const ComplexField& a);

// Integral of |psi|^2 over every axis except `axis` (0-based).
// Requires ||psi|| = 1 within 1e-8.
RealField1D marginal(const ComplexField& psi, std::size_t axis);
// Same marginal for psi / ||psi||; psi need not be normalized.
RealField1D normalized_marginal(const ComplexField& psi, std::size_t axis);

// Wrapped Gaussian exp(-(d + mL)^2 / 2 sigma^2) summed over images until the
// tail falls below 1e-14; not normalized.
double wrapped_gaussian(double d, double sigma, double length);

// Discrete normalization of the wrapped Gaussian on a grid of `cells` points,
// so that sum_j c * wrapped_gaussian(j dx) * dx = 1.
double wrapped_gaussian_norm(std::size_t cells, double length, double sigma);

// Periodic convolution of f with the normalized wrapped Gaussian of standard
// deviation sigma. Mass is preserved.
RealField1D gaussian_smooth(const RealField1D& f, double sigma);

// Spectral derivative along one axis (Nyquist mode dropped).
ComplexField spectral_derivative(const ComplexField& psi, std::size_t axis);

}  // namespace qwo
