#include "robinlap/halfspace.hpp"

#include <cmath>
#include <fstream>

namespace robinlap {

namespace {

// (e^x - 1) / x
cplx phi1(cplx x)
{
    if (std::abs(x) < 1e-300)
        return 1.0;
    return expm1(x) / x;
}

// int_0^H exp(-c z) dz for Re c >= 0
cplx decay_integral(cplx c, double h) { return h * phi1(-c * h); }

// int_0^H exp(-a z - b (2H - z)) dz, arranged so no exponential overflows.
cplx cross_integral(cplx a, cplx b, double h)
{
    const cplx u = a - b;
    if (u.real() >= 0.0)
        return std::exp(-2.0 * b * h) * h * phi1(-u * h);
    return std::exp(-(a + b) * h) * h * phi1(u * h);
}

cvec layer_omegas(const BoundaryGrid& g, cplx lambda)
{
    const auto xi2 = g.frequency_sq();
    cvec w(g.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = weyl_root(xi2[i], lambda);
    return w;
}

void require_same_model(const HalfspaceModel& a, const HalfspaceModel& b)
{
    require_same_grid(a.slab, b.slab);
    if (a.geometry != b.geometry)
        throw Error(ErrorKind::shape_mismatch, "slab fields use different geometries");
}

} // namespace

cplx layer_profile(Geometry geometry, double height, cplx omega, double z)
{
    if (geometry == Geometry::halfspace)
        return std::exp(-omega * z) / omega;
    // [e^{-w z} + e^{-w (2H - z)}] / (w (1 - e^{-2 w H}))
    return (std::exp(-omega * z) + std::exp(-omega * (2.0 * height - z))) / (omega * -expm1(-2.0 * omega * height));
}

cplx layer_cosine_integral(const SlabGrid& slab, Geometry geometry, cplx omega, int k)
{
    const double kz = slab.cosine_wavenumber(k);
    const double e0 = slab.cosine_norm(k);
    const cplx denom = omega * omega + kz * kz;
    if (geometry == Geometry::slab)
        return e0 / denom;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return e0 * (1.0 - sign * std::exp(-omega * slab.height())) / denom;
}

cplx layer_layer_integral(Geometry geometry, double height, cplx a, cplx b)
{
    const cplx e = decay_integral(a + b, height);
    if (geometry == Geometry::halfspace)
        return e / (a * b);
    const cplx num = e + cross_integral(a, b, height) + cross_integral(b, a, height) + std::exp(-(a + b) * height) * e;
    return num / (a * b * -expm1(-2.0 * a * height) * -expm1(-2.0 * b * height));
}

// ---------------------------------------------------------------------------

SlabField::SlabField(HalfspaceModel model) : model_(std::move(model)), coeffs_(model_.slab.size()) {}

SlabField SlabField::from_samples(const SlabFunction& f, HalfspaceModel model)
{
    require_same_grid(f.grid, model.slab);
    SlabField out(std::move(model));
    out.grid().to_spectral(f.values, out.coeffs_);
    return out;
}

SlabField SlabField::from_coefficients(cvec coefficients, HalfspaceModel model)
{
    SlabField out(std::move(model));
    if (coefficients.size() != out.coeffs_.size())
        throw Error(ErrorKind::shape_mismatch, "coefficient count does not match slab");
    out.coeffs_ = std::move(coefficients);
    return out;
}

void SlabField::add_layer(cplx lambda, cvec density)
{
    if (density.size() != grid().boundary().size())
        throw Error(ErrorKind::shape_mismatch, "layer density size");
    for (auto& layer : layers_) {
        if (layer.lambda == lambda) {
            kernels::axpy(1.0, density, layer.density);
            return;
        }
    }
    layers_.push_back({lambda, std::move(density)});
}

SlabField& SlabField::operator+=(const SlabField& other)
{
    require_same_model(model_, other.model_);
    kernels::axpy(1.0, other.coeffs_, coeffs_);
    for (const auto& layer : other.layers_)
        add_layer(layer.lambda, layer.density);
    return *this;
}

SlabField& SlabField::operator-=(const SlabField& other)
{
    require_same_model(model_, other.model_);
    kernels::axpy(-1.0, other.coeffs_, coeffs_);
    for (const auto& layer : other.layers_) {
        cvec neg = layer.density;
        for (auto& v : neg)
            v = -v;
        add_layer(layer.lambda, std::move(neg));
    }
    return *this;
}

SlabField& SlabField::operator*=(cplx s)
{
    for (auto& c : coeffs_)
        c *= s;
    for (auto& layer : layers_)
        for (auto& v : layer.density)
            v *= s;
    return *this;
}

SlabField operator+(SlabField a, const SlabField& b) { return a += b; }
SlabField operator-(SlabField a, const SlabField& b) { return a -= b; }
SlabField operator*(cplx s, SlabField a) { return a *= s; }

SlabFunction SlabField::sample() const
{
    const auto& s = grid();
    SlabFunction out(s);
    s.from_spectral(coeffs_, out.values);
    if (layers_.empty())
        return out;
    std::vector<double> z(static_cast<std::size_t>(s.levels()));
    for (int m = 0; m < s.levels(); ++m)
        z[static_cast<std::size_t>(m)] = s.level(m);
    SlabField layers_only(model_);
    layers_only.layers_ = layers_;
    const cvec extra = layers_only.sample_at(z);
    kernels::axpy(1.0, extra, out.values);
    return out;
}

cvec SlabField::sample_at(std::span<const double> heights) const
{
    const auto& s = grid();
    const auto& b = s.boundary();
    const std::size_t nb = b.size();
    const double h = s.height();
    for (double z : heights)
        if (!(z >= 0.0 && z <= h))
            throw Error(ErrorKind::invalid_argument, "sample height outside [0, H]");

    std::vector<cvec> omegas;
    for (const auto& layer : layers_)
        omegas.push_back(layer_omegas(b, layer.lambda));

    cvec out(heights.size() * nb);
    kernels::for_each_index(heights.size(), [&](std::size_t i) {
        const double z = heights[i];
        cvec spec(nb, 0.0);
        for (int k = 0; k < s.levels(); ++k) {
            const double ek = s.cosine_norm(k) * std::cos(s.cosine_wavenumber(k) * z);
            const cplx* c = coeffs_.data() + static_cast<std::size_t>(k) * nb;
            for (std::size_t j = 0; j < nb; ++j)
                spec[j] += ek * c[j];
        }
        for (std::size_t l = 0; l < layers_.size(); ++l)
            for (std::size_t j = 0; j < nb; ++j)
                spec[j] += layers_[l].density[j] * layer_profile(model_.geometry, h, omegas[l][j], z);
        b.inverse(spec, std::span<cplx>(out.data() + i * nb, nb));
    });
    return out;
}

cplx inner(const SlabField& a, const SlabField& b)
{
    require_same_model(a.model(), b.model());
    const auto& s = a.grid();
    const auto& bg = s.boundary();
    const std::size_t nb = bg.size();
    const Geometry geo = a.model().geometry;
    const double h = s.height();

    cplx total = kernels::dot(a.coefficients(), b.coefficients());

    // <layer, cosine>: sum over xi of density * sum_k P_k conj(c_k)
    auto layer_cosine = [&](const SlabField::Layer& layer, const cvec& coeffs) {
        const cvec w = layer_omegas(bg, layer.lambda);
        cplx acc = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            if (layer.density[j] == 0.0)
                continue;
            cplx sum = 0.0;
            for (int k = 0; k < s.levels(); ++k)
                sum += layer_cosine_integral(s, geo, w[j], k) *
                       std::conj(coeffs[static_cast<std::size_t>(k) * nb + j]);
            acc += layer.density[j] * sum;
        }
        return acc;
    };
    for (const auto& la : a.layers())
        total += layer_cosine(la, b.coefficients());
    for (const auto& lb : b.layers())
        total += std::conj(layer_cosine(lb, a.coefficients()));

    for (const auto& la : a.layers()) {
        const cvec wa = layer_omegas(bg, la.lambda);
        for (const auto& lb : b.layers()) {
            const cvec wb = layer_omegas(bg, lb.lambda);
            for (std::size_t j = 0; j < nb; ++j)
                total += la.density[j] * std::conj(lb.density[j]) *
                         layer_layer_integral(geo, h, wa[j], std::conj(wb[j]));
        }
    }
    return total * bg.frequency_weight();
}

double norm(const SlabField& a) { return std::sqrt(std::max(0.0, inner(a, a).real())); }

SlabField shifted_laplacian(const SlabField& u, cplx lambda)
{
    const auto& s = u.grid();
    const auto& b = s.boundary();
    const std::size_t nb = b.size();
    const auto xi2 = b.frequency_sq();
    cvec c = u.coefficients();
    for (int k = 0; k < s.levels(); ++k) {
        const double kz = s.cosine_wavenumber(k);
        for (std::size_t j = 0; j < nb; ++j)
            c[static_cast<std::size_t>(k) * nb + j] *= xi2[j] + kz * kz - lambda;
    }
    SlabField out = SlabField::from_coefficients(std::move(c), u.model());
    for (const auto& layer : u.layers()) {
        const cplx factor = layer.lambda - lambda;
        if (factor == 0.0)
            continue;
        cvec d = layer.density;
        for (auto& v : d)
            v *= factor;
        out.add_layer(layer.lambda, std::move(d));
    }
    return out;
}

Traces traces(const SlabField& u)
{
    const auto& s = u.grid();
    const auto& b = s.boundary();
    const std::size_t nb = b.size();
    cvec dir(nb, 0.0), neu(nb, 0.0);
    for (int k = 0; k < s.levels(); ++k) {
        const double e0 = s.cosine_norm(k);
        const cplx* c = u.coefficients().data() + static_cast<std::size_t>(k) * nb;
        for (std::size_t j = 0; j < nb; ++j)
            dir[j] += e0 * c[j];
    }
    for (const auto& layer : u.layers()) {
        const cvec w = layer_omegas(b, layer.lambda);
        for (std::size_t j = 0; j < nb; ++j) {
            dir[j] += layer.density[j] * layer_profile(u.model().geometry, s.height(), w[j], 0.0);
            neu[j] += layer.density[j];
        }
    }
    Traces t{BoundaryFunction(b), BoundaryFunction(b)};
    b.inverse(dir, t.dirichlet.values);
    b.inverse(neu, t.neumann.values);
    return t;
}

Traces traces(const SlabFunction& u, const HalfspaceModel& model)
{
    return traces(SlabField::from_samples(u, model));
}

SlabField gamma_apply(cplx lambda, const BoundaryFunction& phi, const HalfspaceModel& model)
{
    require_off_cut(lambda);
    require_same_grid(phi.grid, model.slab.boundary());
    if (phi.space != Space::nodes)
        throw Error(ErrorKind::shape_mismatch, "gamma_apply expects node values");
    cvec density(phi.grid.size());
    phi.grid.forward(phi.values, density);
    SlabField u(model);
    u.add_layer(lambda, std::move(density));
    return u;
}

SlabField neumann_resolvent(cplx lambda, const SlabField& h)
{
    require_off_cut(lambda);
    if (h.has_layers())
        throw Error(ErrorKind::invalid_argument, "neumann_resolvent acts on cosine expansions only");
    const auto& s = h.grid();
    const auto& b = s.boundary();
    const std::size_t nb = b.size();
    const auto xi2 = b.frequency_sq();
    cvec c = h.coefficients();
    kernels::for_each_index(static_cast<std::size_t>(s.levels()), [&](std::size_t k) {
        const double kz = s.cosine_wavenumber(static_cast<int>(k));
        for (std::size_t j = 0; j < nb; ++j)
            c[k * nb + j] /= xi2[j] + kz * kz - lambda;
    });
    return SlabField::from_coefficients(std::move(c), h.model());
}

SlabField neumann_resolvent(cplx lambda, const SlabFunction& h, const HalfspaceModel& model)
{
    return neumann_resolvent(lambda, SlabField::from_samples(h, model));
}

BoundaryFunction adjoint_gamma_apply(cplx lambda, const SlabField& h)
{
    return traces(neumann_resolvent(lambda, h)).dirichlet;
}

BoundaryFunction adjoint_gamma_apply(cplx lambda, const SlabFunction& h, const HalfspaceModel& model)
{
    return adjoint_gamma_apply(lambda, SlabField::from_samples(h, model));
}

void write_slices_csv(const std::filesystem::path& path, const SlabField& u, std::span<const double> heights)
{
    const cvec values = u.sample_at(heights);
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io_error, "cannot open " + path.string());
    out.precision(17);
    const auto& b = u.grid().boundary();
    out << "z";
    for (int ax = 0; ax < b.axes(); ++ax)
        out << ",x" << ax + 1;
    out << ",real,imag\n";
    for (std::size_t i = 0; i < heights.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) {
            out << heights[i];
            for (int ax = 0; ax < b.axes(); ++ax)
                out << ',' << b.node(j, ax);
            const cplx v = values[i * b.size() + j];
            out << ',' << v.real() << ',' << v.imag() << '\n';
        }
    if (!out)
        throw Error(ErrorKind::io_error, "write failed for " + path.string());
}

} // namespace robinlap
