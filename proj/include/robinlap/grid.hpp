#pragma once

#include "robinlap/error.hpp"
#include "robinlap/kernels.hpp"

#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace robinlap {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

inline constexpr double pi = 3.14159265358979323846;

/// Periodic truncation of the boundary R^{d-1} to the box [-L/2, L/2)^{d-1}.
///
/// Nodes are cell centred, x_j = -L/2 + (j + 1/2) L/N per axis, so a point
/// singularity at the origin never sits on a node. Frequencies are stored in
/// FFT order, xi = 2 pi k / L with k in {0, .., N/2-1, -N/2, .., -1}.
///
/// Transforms use the continuum Fourier scaling
///   F(xi_k) = (2 pi)^{-(d-1)/2} (L/N)^{d-1} sum_j g(x_j) exp(-i xi_k . x_j)
/// so that Parseval holds between node quadrature (weight (L/N)^{d-1}) and
/// frequency quadrature (weight (2 pi / L)^{d-1}).
///
/// The grid is immutable and cheap to copy; copies share FFTW plans.
class BoundaryGrid {
public:
    BoundaryGrid(int d, int n, double length);

    int dimension() const noexcept { return d_; }
    int axes() const noexcept { return d_ - 1; }
    int samples_per_axis() const noexcept { return n_; }
    double length() const noexcept { return length_; }
    double spacing() const noexcept { return length_ / n_; }
    std::size_t size() const noexcept { return size_; }

    double cell_volume() const noexcept;
    double frequency_weight() const noexcept;
    double volume() const noexcept;

    double node(std::size_t index, int axis) const;
    int frequency_index(std::size_t index, int axis) const;
    double frequency(std::size_t index, int axis) const;
    /// |xi|^2 per spectral index.
    std::span<const double> frequency_sq() const noexcept;

    void forward(std::span<const cplx> nodes, std::span<cplx> spectrum) const;
    void inverse(std::span<const cplx> spectrum, std::span<cplx> nodes) const;

    bool operator==(const BoundaryGrid& other) const noexcept
    {
        return d_ == other.d_ && n_ == other.n_ && length_ == other.length_;
    }

private:
    struct Impl;
    int d_;
    int n_;
    double length_;
    std::size_t size_;
    std::shared_ptr<const Impl> impl_;
};

/// The slab R^{d-1} x [0, H] truncating the half-space. The normal direction
/// uses Nd Neumann-compatible cosine modes cos(k pi z / H) sampled at the
/// midpoints z_m = (m + 1/2) H / Nd; the midpoint rule is exact for products
/// of two such modes, so sample inner products equal continuum L2 products.
///
/// Slab arrays are level major: index = m * boundary.size() + b.
class SlabGrid {
public:
    SlabGrid(BoundaryGrid boundary, double height, int nd);

    const BoundaryGrid& boundary() const noexcept { return boundary_; }
    double height() const noexcept { return height_; }
    int levels() const noexcept { return nd_; }
    std::size_t size() const noexcept { return boundary_.size() * static_cast<std::size_t>(nd_); }
    double level(int m) const noexcept { return (m + 0.5) * height_ / nd_; }
    double cell_volume() const noexcept { return boundary_.cell_volume() * height_ / nd_; }

    /// Orthonormal cosine basis e_k(z): e_0 = 1/sqrt(H), e_k = sqrt(2/H) cos(k pi z/H).
    double cosine_norm(int k) const noexcept;
    double cosine_wavenumber(int k) const noexcept { return k * pi / height_; }

    /// Node samples -> mixed (frequency, cosine) coefficients, same layout.
    void to_spectral(std::span<const cplx> samples, std::span<cplx> coeffs,
                     Exec exec = Exec::parallel) const;
    void from_spectral(std::span<const cplx> coeffs, std::span<cplx> samples,
                       Exec exec = Exec::parallel) const;

    bool operator==(const SlabGrid& other) const noexcept
    {
        return boundary_ == other.boundary_ && height_ == other.height_ && nd_ == other.nd_;
    }

private:
    struct Impl;
    void cosine_forward(std::span<cplx> data, Exec exec) const;
    void cosine_inverse(std::span<cplx> data, Exec exec) const;

    BoundaryGrid boundary_;
    double height_;
    int nd_;
    std::shared_ptr<const Impl> impl_;
};

enum class Space { nodes, frequencies };

/// Complex samples on a grid. On a BoundaryGrid the values may also be
/// frequency indexed (the output of a forward dft).
template <class Grid>
struct GridFunction {
    Grid grid;
    cvec values;
    Space space = Space::nodes;

    explicit GridFunction(Grid g) : grid(std::move(g)), values(grid.size()) {}
    GridFunction(Grid g, cvec v, Space s = Space::nodes)
        : grid(std::move(g)), values(std::move(v)), space(s)
    {
        if (values.size() != grid.size())
            throw Error(ErrorKind::shape_mismatch, "values do not match grid size");
    }
};

using BoundaryFunction = GridFunction<BoundaryGrid>;
using SlabFunction = GridFunction<SlabGrid>;

enum class Direction { forward, inverse };

BoundaryFunction dft(const BoundaryFunction& g, Direction direction);

struct Norm {
    enum class Kind { l2, lp, hs };
    Kind kind = Kind::l2;
    double param = 2.0;

    static Norm L2() { return {Kind::l2, 2.0}; }
    static Norm Lp(double p) { return {Kind::lp, p}; }
    static Norm Hs(double s) { return {Kind::hs, s}; }
};

double norm(const BoundaryFunction& g, Norm kind);
double norm(const SlabFunction& g, Norm kind);

/// L2 inner product by node quadrature, <a, b> = sum a conj(b) w.
cplx inner(const BoundaryFunction& a, const BoundaryFunction& b);
cplx inner(const SlabFunction& a, const SlabFunction& b);

/// ||grad f||^2 on the slab, computed spectrally from the mixed coefficients.
double grad_norm_sq(const SlabFunction& f);

BoundaryFunction sample_boundary(const BoundaryGrid& grid,
                                 const std::function<cplx(std::span<const double>)>& f);
SlabFunction sample_slab(const SlabGrid& grid,
                         const std::function<cplx(std::span<const double>, double)>& f);

void require_same_grid(const BoundaryGrid& a, const BoundaryGrid& b);
void require_same_grid(const SlabGrid& a, const SlabGrid& b);

// Serialization. CSV rows are "index,real,imag"; binary dumps are raw
// little-endian float64 pairs (real, imag) in array order.
void write_csv(const std::filesystem::path& path, std::span<const cplx> values);
cvec read_csv(const std::filesystem::path& path);
void write_binary(const std::filesystem::path& path, std::span<const cplx> values);
cvec read_binary(const std::filesystem::path& path);

template <class Grid>
GridFunction<Grid> read_csv(const std::filesystem::path& path, const Grid& grid)
{
    return GridFunction<Grid>(grid, read_csv(path));
}

template <class Grid>
GridFunction<Grid> read_binary(const std::filesystem::path& path, const Grid& grid)
{
    return GridFunction<Grid>(grid, read_binary(path));
}

} // namespace robinlap
