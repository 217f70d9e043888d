#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mica/common.hpp"
#include "mica/gmica.hpp"
#include "mica/ortho.hpp"

namespace mica {

enum class Dist { Normal, StudentT3, Exponential };
enum class Design { MicaEx1, MicaEx2, GmicaEx1, GmicaEx2 };

Dist dist_from_string(const std::string& s);
Design design_from_string(const std::string& s);
std::string to_string(Dist d);
std::string to_string(Design d);

struct DgpSpec {
    Design design = Design::MicaEx1;
    int p = 5;
    int n = 200;
    Dist dist = Dist::Normal;
    std::uint64_t seed = 0;
    int burn_in = 500;
    std::optional<double> phi_override;  // test hook for the AR designs

    void validate() const;
};

struct GeneratedData {
    Matrix y;             // n x p observations, rows indexed by time
    OrthoMatrix a_true;   // mixing matrix
    Matrix x_true;        // latent components
    GroupStructure groups_true;
    OrthoMatrix b_true;   // whitening-adjusted ground truth
};

/// AR(1) components with independent innovations per component,
/// phi_i ~ U(0.5, 0.9), each component scaled by its sample sd, mixed by a
/// Haar-random orthogonal matrix.
GeneratedData gen_mica_ex1(const DgpSpec& spec);

/// All-pass ARMA(1,1) components (white but nonlinearly dependent);
/// the standard normal innovation is rejected.
GeneratedData gen_mica_ex2(const DgpSpec& spec);

/// Three base series (ARMA for the first design, all-pass for the second)
/// copied at increasing lead shifts into groups of sizes (p/2, p/3, p/6).
GeneratedData gen_gmica(const DgpSpec& spec);

/// Dispatch on spec.design.
GeneratedData generate(const DgpSpec& spec);

struct WhitenResult {
    Matrix w;          // centered and sphered series, cov(w) = I
    Matrix transform;  // symmetric inverse square root of the sample covariance
};

/// Column-centers y and multiplies by cov(y)^{-1/2} (eigendecomposition).
WhitenResult whiten(const Matrix& y);

/// Ground truth against which estimates on whitened data are scored:
/// QR re-orthonormalization of transform * a_true * cov(x)^{1/2}, where
/// cov(x) has its cross-group blocks zeroed.
OrthoMatrix adjusted_truth(const OrthoMatrix& a_true, const Matrix& x_true,
                           const GroupStructure& groups,
                           const Matrix& transform);

}  // namespace mica
