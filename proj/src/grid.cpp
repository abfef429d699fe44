#include "robinlap/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

namespace robinlap {

namespace {

// The FFTW planner is not re-entrant; plan execution is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

std::size_t ipow(std::size_t base, int e)
{
    std::size_t r = 1;
    for (int i = 0; i < e; ++i)
        r *= base;
    return r;
}

} // namespace

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::invalid_size: return "invalid-size";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::cut_violation: return "cut-violation";
    case ErrorKind::non_real: return "non-real";
    case ErrorKind::non_finite: return "non-finite";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::contraction_violation: return "contraction-violation";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::spectral_collision: return "spectral-collision";
    case ErrorKind::constraint_singular: return "constraint-singular";
    case ErrorKind::indefinite_system: return "indefinite-system";
    case ErrorKind::config_invalid: return "config-invalid";
    case ErrorKind::io_error: return "io-error";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// BoundaryGrid

struct BoundaryGrid::Impl {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    cvec forward_phase;  // scaling * exp(-i xi . x_0)
    cvec inverse_phase;  // scaling * exp(+i xi . x_0)
    std::vector<double> freq_sq;

    ~Impl()
    {
        std::lock_guard lock(planner_mutex());
        if (forward)
            fftw_destroy_plan(forward);
        if (backward)
            fftw_destroy_plan(backward);
    }
};

BoundaryGrid::BoundaryGrid(int d, int n, double length) : d_(d), n_(n), length_(length)
{
    if (d != 2 && d != 3)
        throw Error(ErrorKind::invalid_dimension, "d must be 2 or 3, got " + std::to_string(d));
    if (n < 4 || !std::has_single_bit(static_cast<unsigned>(n)))
        throw Error(ErrorKind::invalid_size, "N must be a power of two >= 4, got " + std::to_string(n));
    if (!(length > 0.0) || !std::isfinite(length))
        throw Error(ErrorKind::invalid_argument, "box length must be positive");

    size_ = ipow(static_cast<std::size_t>(n), d - 1);
    auto impl = std::make_shared<Impl>();

    const int a = d - 1;
    const double x0 = -0.5 * length + 0.5 * spacing();
    const double fwd_scale = std::pow(2.0 * pi, -0.5 * a) * std::pow(spacing(), a);
    const double inv_scale = std::pow(2.0 * pi, -0.5 * a) * std::pow(2.0 * pi / length, a);

    impl->forward_phase.resize(size_);
    impl->inverse_phase.resize(size_);
    impl->freq_sq.resize(size_);
    for (std::size_t i = 0; i < size_; ++i) {
        double xi_dot_x0 = 0.0;
        double xi_sq = 0.0;
        for (int ax = 0; ax < a; ++ax) {
            const double xi = frequency(i, ax);
            xi_dot_x0 += xi * x0;
            xi_sq += xi * xi;
        }
        impl->forward_phase[i] = fwd_scale * std::polar(1.0, -xi_dot_x0);
        impl->inverse_phase[i] = inv_scale * std::polar(1.0, xi_dot_x0);
        impl->freq_sq[i] = xi_sq;
    }

    cvec in(size_), out(size_);
    const int dims[2] = {n, n};
    {
        std::lock_guard lock(planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        impl->forward = fftw_plan_dft(a, dims, as_fftw(in.data()), as_fftw(out.data()), FFTW_FORWARD, flags);
        impl->backward = fftw_plan_dft(a, dims, as_fftw(in.data()), as_fftw(out.data()), FFTW_BACKWARD, flags);
    }
    impl_ = std::move(impl);
}

double BoundaryGrid::cell_volume() const noexcept { return std::pow(spacing(), axes()); }
double BoundaryGrid::frequency_weight() const noexcept { return std::pow(2.0 * pi / length_, axes()); }
double BoundaryGrid::volume() const noexcept { return std::pow(length_, axes()); }

double BoundaryGrid::node(std::size_t index, int axis) const
{
    // Axis 0 varies slowest (row-major).
    std::size_t stride = ipow(static_cast<std::size_t>(n_), axes() - 1 - axis);
    const auto j = static_cast<int>((index / stride) % static_cast<std::size_t>(n_));
    return -0.5 * length_ + (j + 0.5) * spacing();
}

int BoundaryGrid::frequency_index(std::size_t index, int axis) const
{
    std::size_t stride = ipow(static_cast<std::size_t>(n_), axes() - 1 - axis);
    const auto j = static_cast<int>((index / stride) % static_cast<std::size_t>(n_));
    return j < n_ / 2 ? j : j - n_;
}

double BoundaryGrid::frequency(std::size_t index, int axis) const
{
    return 2.0 * pi / length_ * frequency_index(index, axis);
}

std::span<const double> BoundaryGrid::frequency_sq() const noexcept { return impl_->freq_sq; }

void BoundaryGrid::forward(std::span<const cplx> nodes, std::span<cplx> spectrum) const
{
    if (nodes.size() != size_ || spectrum.size() != size_)
        throw Error(ErrorKind::shape_mismatch, "boundary transform size");
    if (nodes.data() == spectrum.data()) {
        cvec tmp(nodes.begin(), nodes.end());
        fftw_execute_dft(impl_->forward, as_fftw(tmp.data()), as_fftw(spectrum.data()));
    } else {
        fftw_execute_dft(impl_->forward, as_fftw(nodes.data()), as_fftw(spectrum.data()));
    }
    kernels::serial::multiply(spectrum, std::span<const cplx>(impl_->forward_phase));
}

void BoundaryGrid::inverse(std::span<const cplx> spectrum, std::span<cplx> nodes) const
{
    if (nodes.size() != size_ || spectrum.size() != size_)
        throw Error(ErrorKind::shape_mismatch, "boundary transform size");
    cvec tmp(spectrum.begin(), spectrum.end());
    kernels::serial::multiply(std::span<cplx>(tmp), std::span<const cplx>(impl_->inverse_phase));
    fftw_execute_dft(impl_->backward, as_fftw(tmp.data()), as_fftw(nodes.data()));
}

// ---------------------------------------------------------------------------
// SlabGrid

struct SlabGrid::Impl {
    fftw_plan dct2 = nullptr;  // REDFT10 along one strided column
    fftw_plan dct3 = nullptr;  // REDFT01
    std::vector<double> norms;

    ~Impl()
    {
        std::lock_guard lock(planner_mutex());
        if (dct2)
            fftw_destroy_plan(dct2);
        if (dct3)
            fftw_destroy_plan(dct3);
    }
};

SlabGrid::SlabGrid(BoundaryGrid boundary, double height, int nd)
    : boundary_(std::move(boundary)), height_(height), nd_(nd)
{
    if (!(height > 0.0) || !std::isfinite(height))
        throw Error(ErrorKind::invalid_argument, "slab height must be positive");
    if (nd < 4)
        throw Error(ErrorKind::invalid_size, "Nd must be >= 4, got " + std::to_string(nd));

    auto impl = std::make_shared<Impl>();
    impl->norms.resize(static_cast<std::size_t>(nd));
    for (int k = 0; k < nd; ++k)
        impl->norms[static_cast<std::size_t>(k)] = k == 0 ? 1.0 / std::sqrt(height) : std::sqrt(2.0 / height);

    const int stride = 2 * static_cast<int>(boundary_.size());
    std::vector<double> buf(static_cast<std::size_t>(stride) * static_cast<std::size_t>(nd));
    {
        std::lock_guard lock(planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        const fftw_r2r_kind k2 = FFTW_REDFT10, k3 = FFTW_REDFT01;
        impl->dct2 = fftw_plan_many_r2r(1, &nd_, 1, buf.data(), nullptr, stride, 0, buf.data(), nullptr,
                                        stride, 0, &k2, flags);
        impl->dct3 = fftw_plan_many_r2r(1, &nd_, 1, buf.data(), nullptr, stride, 0, buf.data(), nullptr,
                                        stride, 0, &k3, flags);
    }
    impl_ = std::move(impl);
}

double SlabGrid::cosine_norm(int k) const noexcept { return impl_->norms[static_cast<std::size_t>(k)]; }

void SlabGrid::cosine_forward(std::span<cplx> data, Exec exec) const
{
    const std::size_t nb = boundary_.size();
    double* base = reinterpret_cast<double*>(data.data());
    kernels::for_each_index(
        2 * nb, [&](std::size_t c) { fftw_execute_r2r(impl_->dct2, base + c, base + c); }, exec);
    const double dz = height_ / nd_;
    kernels::for_each_index(
        static_cast<std::size_t>(nd_),
        [&](std::size_t k) {
            const double s = 0.5 * dz * impl_->norms[k];
            for (std::size_t b = 0; b < nb; ++b)
                data[k * nb + b] *= s;
        },
        exec);
}

void SlabGrid::cosine_inverse(std::span<cplx> data, Exec exec) const
{
    const std::size_t nb = boundary_.size();
    kernels::for_each_index(
        static_cast<std::size_t>(nd_),
        [&](std::size_t k) {
            const double s = k == 0 ? impl_->norms[0] : 0.5 * impl_->norms[k];
            for (std::size_t b = 0; b < nb; ++b)
                data[k * nb + b] *= s;
        },
        exec);
    double* base = reinterpret_cast<double*>(data.data());
    kernels::for_each_index(
        2 * nb, [&](std::size_t c) { fftw_execute_r2r(impl_->dct3, base + c, base + c); }, exec);
}

void SlabGrid::to_spectral(std::span<const cplx> samples, std::span<cplx> coeffs, Exec exec) const
{
    if (samples.size() != size() || coeffs.size() != size())
        throw Error(ErrorKind::shape_mismatch, "slab transform size");
    const std::size_t nb = boundary_.size();
    cvec tmp(samples.begin(), samples.end());
    kernels::for_each_index(
        static_cast<std::size_t>(nd_),
        [&](std::size_t m) {
            boundary_.forward(std::span<const cplx>(tmp).subspan(m * nb, nb), coeffs.subspan(m * nb, nb));
        },
        exec);
    cosine_forward(coeffs, exec);
}

void SlabGrid::from_spectral(std::span<const cplx> coeffs, std::span<cplx> samples, Exec exec) const
{
    if (samples.size() != size() || coeffs.size() != size())
        throw Error(ErrorKind::shape_mismatch, "slab transform size");
    const std::size_t nb = boundary_.size();
    cvec tmp(coeffs.begin(), coeffs.end());
    cosine_inverse(tmp, exec);
    kernels::for_each_index(
        static_cast<std::size_t>(nd_),
        [&](std::size_t m) {
            boundary_.inverse(std::span<const cplx>(tmp).subspan(m * nb, nb), samples.subspan(m * nb, nb));
        },
        exec);
}

// ---------------------------------------------------------------------------
// Grid functions

void require_same_grid(const BoundaryGrid& a, const BoundaryGrid& b)
{
    if (!(a == b))
        throw Error(ErrorKind::shape_mismatch, "boundary grids differ");
}

void require_same_grid(const SlabGrid& a, const SlabGrid& b)
{
    if (!(a == b))
        throw Error(ErrorKind::shape_mismatch, "slab grids differ");
}

BoundaryFunction dft(const BoundaryFunction& g, Direction direction)
{
    BoundaryFunction out(g.grid);
    if (direction == Direction::forward) {
        if (g.space != Space::nodes)
            throw Error(ErrorKind::shape_mismatch, "forward dft expects node-indexed values");
        g.grid.forward(g.values, out.values);
        out.space = Space::frequencies;
    } else {
        if (g.space != Space::frequencies)
            throw Error(ErrorKind::shape_mismatch, "inverse dft expects frequency-indexed values");
        g.grid.inverse(g.values, out.values);
        out.space = Space::nodes;
    }
    return out;
}

namespace {

double lp_sum(std::span<const cplx> values, double p)
{
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& v : values)
            m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    for (const auto& v : values)
        s += std::pow(std::abs(v), p);
    return s;
}

double lp_norm(std::span<const cplx> values, double p, double weight)
{
    if (!(p >= 1.0))
        throw Error(ErrorKind::invalid_argument, "Lp norm requires p >= 1");
    if (std::isinf(p))
        return lp_sum(values, p);
    if (p == 2.0)
        return std::sqrt(kernels::norm_sq(values) * weight);
    return std::pow(lp_sum(values, p) * weight, 1.0 / p);
}

} // namespace

double norm(const BoundaryFunction& g, Norm kind)
{
    const auto& grid = g.grid;
    switch (kind.kind) {
    case Norm::Kind::l2:
        return std::sqrt(kernels::norm_sq(g.values) *
                         (g.space == Space::nodes ? grid.cell_volume() : grid.frequency_weight()));
    case Norm::Kind::lp:
        if (g.space != Space::nodes)
            throw Error(ErrorKind::shape_mismatch, "Lp norm needs node values");
        return lp_norm(g.values, kind.param, grid.cell_volume());
    case Norm::Kind::hs: {
        cvec spec = g.values;
        if (g.space == Space::nodes)
            grid.forward(g.values, spec);
        const auto xi2 = grid.frequency_sq();
        double s = 0.0;
        for (std::size_t i = 0; i < spec.size(); ++i)
            s += std::pow(1.0 + xi2[i], kind.param) * std::norm(spec[i]);
        return std::sqrt(s * grid.frequency_weight());
    }
    }
    return 0.0;
}

double norm(const SlabFunction& g, Norm kind)
{
    switch (kind.kind) {
    case Norm::Kind::l2:
        return std::sqrt(kernels::norm_sq(g.values) * g.grid.cell_volume());
    case Norm::Kind::lp:
        return lp_norm(g.values, kind.param, g.grid.cell_volume());
    case Norm::Kind::hs:
        break;
    }
    throw Error(ErrorKind::invalid_argument, "Hs norm is defined for boundary functions only");
}

cplx inner(const BoundaryFunction& a, const BoundaryFunction& b)
{
    require_same_grid(a.grid, b.grid);
    if (a.space != b.space)
        throw Error(ErrorKind::shape_mismatch, "inner product of node and frequency data");
    const double w = a.space == Space::nodes ? a.grid.cell_volume() : a.grid.frequency_weight();
    return kernels::dot(a.values, b.values) * w;
}

cplx inner(const SlabFunction& a, const SlabFunction& b)
{
    require_same_grid(a.grid, b.grid);
    return kernels::dot(a.values, b.values) * a.grid.cell_volume();
}

double grad_norm_sq(const SlabFunction& f)
{
    const auto& grid = f.grid;
    cvec c(grid.size());
    grid.to_spectral(f.values, c);
    const std::size_t nb = grid.boundary().size();
    const auto xi2 = grid.boundary().frequency_sq();
    double s = 0.0;
    for (int k = 0; k < grid.levels(); ++k) {
        const double kz = grid.cosine_wavenumber(k);
        for (std::size_t b = 0; b < nb; ++b)
            s += (xi2[b] + kz * kz) * std::norm(c[static_cast<std::size_t>(k) * nb + b]);
    }
    return s * grid.boundary().frequency_weight();
}

BoundaryFunction sample_boundary(const BoundaryGrid& grid,
                                 const std::function<cplx(std::span<const double>)>& f)
{
    BoundaryFunction g(grid);
    double x[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int ax = 0; ax < grid.axes(); ++ax)
            x[ax] = grid.node(i, ax);
        g.values[i] = f(std::span<const double>(x, static_cast<std::size_t>(grid.axes())));
    }
    return g;
}

SlabFunction sample_slab(const SlabGrid& grid,
                         const std::function<cplx(std::span<const double>, double)>& f)
{
    SlabFunction g(grid);
    const auto& bg = grid.boundary();
    const std::size_t nb = bg.size();
    double x[2] = {0.0, 0.0};
    for (int m = 0; m < grid.levels(); ++m) {
        const double z = grid.level(m);
        for (std::size_t b = 0; b < nb; ++b) {
            for (int ax = 0; ax < bg.axes(); ++ax)
                x[ax] = bg.node(b, ax);
            g.values[static_cast<std::size_t>(m) * nb + b] =
                f(std::span<const double>(x, static_cast<std::size_t>(bg.axes())), z);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Serialization

void write_csv(const std::filesystem::path& path, std::span<const cplx> values)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io_error, "cannot open " + path.string());
    out.precision(17);
    out << "index,real,imag\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out << i << ',' << values[i].real() << ',' << values[i].imag() << '\n';
    if (!out)
        throw Error(ErrorKind::io_error, "write failed for " + path.string());
}

cvec read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io_error, "cannot open " + path.string());
    cvec values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        if (line.find_first_of("0123456789") != 0 && line[0] != '-' && line[0] != ' ')
            continue;  // header
        std::stringstream ss(line);
        std::string idx, re, im;
        std::getline(ss, idx, ',');
        std::getline(ss, re, ',');
        std::getline(ss, im, ',');
        try {
            const auto i = static_cast<std::size_t>(std::stoull(idx));
            if (i != values.size())
                throw Error(ErrorKind::io_error, "CSV indices must be consecutive from 0");
            values.emplace_back(std::stod(re), im.empty() ? 0.0 : std::stod(im));
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::io_error, "malformed CSV row: " + line);
        }
    }
    return values;
}

void write_binary(const std::filesystem::path& path, std::span<const cplx> values)
{
    static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::io_error, "cannot open " + path.string());
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(cplx)));
    if (!out)
        throw Error(ErrorKind::io_error, "write failed for " + path.string());
}

cvec read_binary(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in)
        throw Error(ErrorKind::io_error, "cannot open " + path.string());
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % sizeof(cplx) != 0)
        throw Error(ErrorKind::io_error, "binary dump size is not a multiple of 16 bytes");
    cvec values(bytes / sizeof(cplx));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
    return values;
}

} // namespace robinlap
