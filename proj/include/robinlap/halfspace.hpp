#pragma once

#include "robinlap/grid.hpp"
#include "robinlap/multiplier.hpp"

#include <filesystem>
#include <vector>

namespace robinlap {

/// The truncated half-space together with the Weyl geometry used by every
/// operation of one solve.
struct HalfspaceModel {
    SlabGrid slab;
    Geometry geometry = Geometry::slab;

    WeylGeometry weyl() const
    {
        return geometry == Geometry::slab ? WeylGeometry::slab(slab.height()) : WeylGeometry::halfspace();
    }
};

/// Normal profile of a gamma-field mode with Neumann datum 1:
///   slab:      cosh(w (H - z)) / (w sinh(w H))
///   halfspace: exp(-w z) / w
cplx layer_profile(Geometry geometry, double height, cplx omega, double z);
/// int_0^H profile(z) e_k(z) dz
cplx layer_cosine_integral(const SlabGrid& slab, Geometry geometry, cplx omega, int k);
/// int_0^H profile_a(z) profile_b(z) dz, no conjugation.
cplx layer_layer_integral(Geometry geometry, double height, cplx a, cplx b);

/// A slab field kept in a form on which traces, -Delta and L2 products are
/// exact: a truncated cosine expansion plus analytic gamma-field layers.
///
/// A layer {lambda, density} stands for the field whose boundary mode xi is
/// density(xi) * profile(omega(xi), z) with omega = (|xi|^2 - lambda)^{1/2}.
/// It solves (-Delta - lambda) u = 0 and has Neumann trace equal to the
/// inverse transform of density.
class SlabField {
public:
    struct Layer {
        cplx lambda;
        cvec density;  // frequency indexed
    };

    explicit SlabField(HalfspaceModel model);
    /// Projects node samples onto the cosine expansion.
    static SlabField from_samples(const SlabFunction& f, HalfspaceModel model);
    static SlabField from_coefficients(cvec coefficients, HalfspaceModel model);

    const HalfspaceModel& model() const noexcept { return model_; }
    const SlabGrid& grid() const noexcept { return model_.slab; }

    /// Mixed (frequency, cosine) coefficients in the orthonormal basis, level major.
    const cvec& coefficients() const noexcept { return coeffs_; }
    cvec& coefficients() noexcept { return coeffs_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    bool has_layers() const noexcept { return !layers_.empty(); }

    /// Adds a layer; densities with equal lambda are merged.
    void add_layer(cplx lambda, cvec density);

    SlabField& operator+=(const SlabField& other);
    SlabField& operator-=(const SlabField& other);
    SlabField& operator*=(cplx s);

    /// Values at the collocation levels.
    SlabFunction sample() const;
    /// Values at arbitrary heights, height major (index = i * nb + node).
    cvec sample_at(std::span<const double> heights) const;

private:
    HalfspaceModel model_;
    cvec coeffs_;
    std::vector<Layer> layers_;
};

SlabField operator+(SlabField a, const SlabField& b);
SlabField operator-(SlabField a, const SlabField& b);
SlabField operator*(cplx s, SlabField a);

/// Exact L2(slab) product <a, b> = int a conj(b).
cplx inner(const SlabField& a, const SlabField& b);
double norm(const SlabField& a);

/// (-Delta - lambda) u. Layers with matching lambda vanish identically.
SlabField shifted_laplacian(const SlabField& u, cplx lambda);
inline SlabField laplacian(const SlabField& u) { return shifted_laplacian(u, 0.0); }

struct Traces {
    BoundaryFunction dirichlet;
    BoundaryFunction neumann;  // -d/dz at z = 0
};

Traces traces(const SlabField& u);
Traces traces(const SlabFunction& u, const HalfspaceModel& model);

/// gamma(lambda) phi: the solution of (-Delta - lambda) u = 0 with Neumann trace phi.
SlabField gamma_apply(cplx lambda, const BoundaryFunction& phi, const HalfspaceModel& model);

/// (A_N - lambda)^{-1} h on the cosine expansion; h must not carry layers.
SlabField neumann_resolvent(cplx lambda, const SlabField& h);
SlabField neumann_resolvent(cplx lambda, const SlabFunction& h, const HalfspaceModel& model);

/// tau_D (A_N - lambda)^{-1} h, which is gamma(conj(lambda))^* h.
BoundaryFunction adjoint_gamma_apply(cplx lambda, const SlabField& h);
BoundaryFunction adjoint_gamma_apply(cplx lambda, const SlabFunction& h, const HalfspaceModel& model);

/// CSV with columns z, x1[, x2], real, imag; one block per height.
void write_slices_csv(const std::filesystem::path& path, const SlabField& u, std::span<const double> heights);

} // namespace robinlap
