#pragma once

// Sampled checks of the analytic estimates behind the Robin construction.
// Suprema over finite random families underestimate operator norms, so every
// verdict is about growth across grids, never about absolute constants.

#include "robinlap/robin.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace robinlap {

enum class Verdict { bounded, growing };
std::string_view to_string(Verdict v) noexcept;

struct SweepReport {
    std::string name;
    std::map<std::string, double> parameters;
    std::vector<int> grids;
    std::vector<double> ratios;   // supremum per grid
    Verdict verdict = Verdict::bounded;
    int samples = 0;              // per grid
    std::map<std::string, double> extras;

    /// ratios.back() / ratios.front()
    double growth() const;
};

/// Bounded iff the supremum grows by at most this factor across the grid list.
inline constexpr double growth_threshold = 2.0;

struct SweepOptions {
    int samples = 128;
    std::uint64_t seed = 1;
};

/// sup_phi ||M(lambda) phi||_{H^s} / ||phi||_{L^p} per boundary grid N (box
/// length L, slab Weyl symbol of height H). The family mixes the constant,
/// random modes and Gaussian bumps down to the grid spacing.
SweepReport lemma32_sweep(int d, double p, double s, cplx lambda, const std::vector<int>& grids, double length,
                          double height, const SweepOptions& options = {});

/// Smoothness at which the Weyl function maps L^p into H^s: 1 - (d-1)(1/p - 1/2).
double lemma32_critical_s(int d, double p) noexcept;

/// sup_phi || |alpha|^t phi ||_2 / ||phi||_{H^{t(d-1)/p}} per grid, plus the
/// discrete L^{p/t} norm of |alpha_p|^t on the finest grid (extras "lpt_norm").
SweepReport lemma33_constant(const Expression& alpha, int d, double t, double p, const std::vector<int>& grids,
                             double length, const SweepOptions& options = {});

/// max over f of (||f||^2_{H^s} - eps ||grad f||^2) / ||f||^2 on each slab,
/// with the slab-spectral H^s norm. Bounded iff the values agree within 10%.
SweepReport lemma35_constant(double s, double eps, const std::vector<SlabGrid>& slabs,
                             const SweepOptions& options = {});

/// max_{q >= 0} (1 + q)^s - eps q
double lemma35_closed_form(double s, double eps) noexcept;

struct KlmnPoint {
    double b = 0.0;
    double a_empirical = 0.0;  // sup (|t[f]| - b ||grad f||^2) / ||f||^2 over samples
    double a_certified = 0.0;  // b mu with || |alpha|^{1/2} M(-mu) |alpha|^{1/2} || <= b
    double mu = 0.0;
};

struct KlmnResult {
    double a = 0.0;
    double b = 0.0;
    std::vector<KlmnPoint> frontier;  // decreasing b
    bool success = false;             // some b < 1 is certified
    bool form_admissible = false;     // integrability of the declared p
    int samples = 0;
};

struct KlmnOptions {
    std::vector<double> b_values{0.9, 0.5, 0.25, 0.1};
    double report_b = 0.5;  // which frontier point becomes (a, b)
    int samples = 128;
    int norm_iterations = 40;
    std::uint64_t seed = 1;
};

/// Relative form bound of f -> int alpha |f(x', 0)|^2 with respect to ||grad f||^2.
KlmnResult klmn_bound(const RobinCoefficient& alpha, const SlabGrid& slab, const KlmnOptions& options = {});

nlohmann::json to_json(const SweepReport& r);
nlohmann::json to_json(const KlmnResult& r);
/// One row per grid: name, parameters..., grid, ratio, verdict.
void write_csv(const std::filesystem::path& path, const std::vector<SweepReport>& reports);

} // namespace robinlap
