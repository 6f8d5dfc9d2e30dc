#include "qwo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qwo/fft.hpp"

namespace qwo {

GridSpec::GridSpec(std::size_t n_particles, std::size_t cells_per_axis, double axis_length,
                   double origin)
    : n_particles_(n_particles), cells_(cells_per_axis), length_(axis_length), origin_(origin) {
    if (n_particles_ < 1 || n_particles_ > kMaxParticles)
        throw std::invalid_argument("n_particles must be in 1..4");
    if (cells_ < 2 || (cells_ & (cells_ - 1)) != 0)
        throw std::invalid_argument("cells_per_axis must be a power of two >= 2");
    if (!(length_ > 0.0) || !std::isfinite(length_))
        throw std::invalid_argument("axis_length must be positive");
    if (!std::isfinite(origin_)) throw std::invalid_argument("origin must be finite");
    size_ = 1;
    for (std::size_t a = 0; a < n_particles_; ++a) size_ *= cells_;
    cell_volume_ = std::pow(dx(), static_cast<double>(n_particles_));
}

double GridSpec::wavenumber(std::size_t j) const {
    const auto n = static_cast<long>(cells_);
    const auto jj = static_cast<long>(j);
    const long m = jj < n / 2 ? jj : jj - n;
    return 2.0 * std::numbers::pi * static_cast<double>(m) / length_;
}

std::size_t GridSpec::stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t a = axis + 1; a < n_particles_; ++a) s *= cells_;
    return s;
}

std::array<std::size_t, kMaxParticles> GridSpec::unravel(std::size_t flat) const {
    std::array<std::size_t, kMaxParticles> idx{};
    for (std::size_t a = n_particles_; a-- > 0;) {
        idx[a] = flat % cells_;
        flat /= cells_;
    }
    return idx;
}

double GridSpec::wrap(double x) const {
    double r = std::fmod(x - origin_, length_);
    if (r < 0.0) r += length_;
    if (r >= length_) r = 0.0;
    return origin_ + r;
}

double GridSpec::periodic_delta(double a, double b) const {
    double d = std::fmod(a - b, length_);
    if (d < -0.5 * length_) d += length_;
    if (d >= 0.5 * length_) d -= length_;
    return d;
}

ComplexField::ComplexField(GridSpec grid) : grid_(grid), values_(grid.size(), cplx{}) {}

ComplexField::ComplexField(GridSpec grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("field length " + std::to_string(values_.size()) +
                                    " does not match grid size " + std::to_string(grid_.size()));
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("field contains non-finite values");
}

ComplexField ComplexField::scaled(cplx c) const {
    std::vector<cplx> out(values_);
    for (auto& v : out) v *= c;
    return ComplexField(grid_, std::move(out));
}

ComplexField ComplexField::normalized() const {
    const double n = norm(*this);
    if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero field");
    return scaled(1.0 / n);
}

RealField1D::RealField1D(std::size_t cells_, double length_, double origin_,
                         std::vector<double> values_)
    : cells(cells_), length(length_), origin(origin_), values(std::move(values_)) {
    if (cells == 0 || values.size() != cells)
        throw std::invalid_argument("RealField1D: value count does not match cells");
    if (!(length > 0.0)) throw std::invalid_argument("RealField1D: length must be positive");
}

double RealField1D::total() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * dx();
}

RealField1D physical_axis(const GridSpec& grid, std::vector<double> values) {
    return RealField1D(grid.cells(), grid.length(), grid.origin(), std::move(values));
}

cplx inner(const ComplexField& a, const ComplexField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("inner: grid mismatch");
    cplx s{};
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) s += std::conj(av[i]) * bv[i];
    return s * a.grid().cell_volume();
}

double norm(const ComplexField& a) {
    double s = 0.0;
    for (const auto& v : a.values()) s += std::norm(v);
    return std::sqrt(s * a.grid().cell_volume());
}

namespace {

std::vector<double> axis_sums(const ComplexField& psi, std::size_t axis) {
    const auto& g = psi.grid();
    if (axis >= g.n_particles()) throw std::out_of_range("marginal: axis out of range");
    const std::size_t n = g.cells();
    const std::size_t s = g.stride(axis);
    std::vector<double> out(n, 0.0);
    const auto v = psi.values();
    for (std::size_t i = 0; i < v.size(); ++i) out[(i / s) % n] += std::norm(v[i]);
    return out;
}

}  // namespace

RealField1D marginal(const ComplexField& psi, std::size_t axis) {
    const double nrm = norm(psi);
    if (std::abs(nrm * nrm - 1.0) > 1e-8)
        throw std::invalid_argument("marginal: wave function is not normalized (norm^2 = " +
                                    std::to_string(nrm * nrm) + ")");
    return normalized_marginal(psi, axis);
}

RealField1D normalized_marginal(const ComplexField& psi, std::size_t axis) {
    const auto& g = psi.grid();
    auto sums = axis_sums(psi, axis);
    double total = 0.0;
    for (double v : sums) total += v;
    if (!(total > 0.0)) throw std::invalid_argument("marginal of a zero field");
    // sums * dx^(N-1) / ||psi||^2 with ||psi||^2 = total * dx^N
    const double scale = 1.0 / (total * g.dx());
    for (auto& v : sums) v *= scale;
    return physical_axis(g, std::move(sums));
}

double wrapped_gaussian(double d, double sigma, double length) {
    d = std::remainder(d, length);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    double sum = std::exp(-d * d * inv);
    for (int m = 1;; ++m) {
        const double a = d + m * length;
        const double b = d - m * length;
        const double term = std::exp(-a * a * inv) + std::exp(-b * b * inv);
        sum += term;
        if (term <= 1e-14 * sum || term == 0.0) break;
    }
    return sum;
}

double wrapped_gaussian_norm(std::size_t cells, double length, double sigma) {
    const double dx = length / static_cast<double>(cells);
    double s = 0.0;
    for (std::size_t j = 0; j < cells; ++j)
        s += wrapped_gaussian(static_cast<double>(j) * dx, sigma, length);
    return 1.0 / (s * dx);
}

RealField1D gaussian_smooth(const RealField1D& f, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_smooth: sigma must be positive");
    const std::size_t n = f.cells;
    const double dx = f.dx();
    const double c = wrapped_gaussian_norm(n, f.length, sigma);
    std::vector<cplx> kernel(n), data(n);
    for (std::size_t j = 0; j < n; ++j) {
        kernel[j] = c * dx * wrapped_gaussian(static_cast<double>(j) * dx, sigma, f.length);
        data[j] = f.values[j];
    }
    fft::transform(kernel, n, 1, fft::Direction::forward);
    fft::transform(data, n, 1, fft::Direction::forward);
    for (std::size_t j = 0; j < n; ++j) data[j] *= kernel[j];
    fft::transform(data, n, 1, fft::Direction::backward);
    std::vector<double> out(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = std::max(0.0, data[j].real() * inv_n);
    return RealField1D(n, f.length, f.origin, std::move(out));
}

ComplexField spectral_derivative(const ComplexField& psi, std::size_t axis) {
    const auto& g = psi.grid();
    if (axis >= g.n_particles()) throw std::out_of_range("derivative: axis out of range");
    std::vector<cplx> data(psi.values().begin(), psi.values().end());
    const std::size_t n = g.cells();
    fft::transform_axis(data, n, g.n_particles(), axis, fft::Direction::forward);
    const std::size_t s = g.stride(axis);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::size_t j = (i / s) % n;
        const double k = (j == n / 2) ? 0.0 : g.wavenumber(j);
        data[i] *= cplx(0.0, k * inv_n);
    }
    fft::transform_axis(data, n, g.n_particles(), axis, fft::Direction::backward);
    return ComplexField(g, std::move(data));
}

}  // namespace qwo
