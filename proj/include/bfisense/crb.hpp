#pragma once

// Gaussian-kernel approximation of p(theta | x) around the noise-free BFI and
// the Fisher information / CRB it implies for positional parameters x.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bfisense/bfi.hpp"
#include "bfisense/channel.hpp"

namespace bfisense {

/// Named positional parameters. Recognized names: "aod", "aoa" (rad),
/// "distance", "x", "y" (m). Coordinates not listed come from a base pose.
struct PositionParams {
    std::vector<std::string> names;
    RealVector values;

    Eigen::Index dim() const { return values.size(); }
    void validate() const;
};

bool is_angle_parameter(const std::string& name);

/// Pose obtained by overriding `base` with the entries of `x`. When x or y is
/// present the UD is placed at (x, y) with broadside facing the AP.
Pose resolve_pose(const PositionParams& x, const Pose& base);

struct CrbConfig {
    int n_mc = 1000;
    double fd_step_angle = 1e-3;    // rad
    double fd_step_distance = 1e-4; // m; the phase turns 2pi per wavelength
    double ridge = 1e-10;
    std::uint64_t seed = 1;

    void validate() const;
};

struct GaussianModel {
    Bfi mean;              // BFI of the noise-free channel
    RealMatrix covariance; // N_BFI x N_BFI, ridge included
    int n_samples = 0;
};

/// Wrapped difference theta - theta_bar: phi into [-pi, pi), psi into
/// [-pi/4, pi/4).
RealVector periodic_diff(const Bfi& theta, const Bfi& theta_bar);
double periodic_diff(AngleKind kind, double value, double reference);

/// Noise-free BFI at x; throws DegenerateInput if the steering matrix is not
/// unique there.
Bfi mean_bfi(const PositionParams& x, const Scenario& scenario, int k = 1);

GaussianModel estimate_moments(const PositionParams& x, const Scenario& scenario, const CrbConfig& cfg, int k = 1);

/// N_BFI x D central-difference Jacobian of the noise-free BFI map.
RealMatrix bfi_jacobian(const PositionParams& x, const Scenario& scenario, const CrbConfig& cfg, int k = 1);

struct FisherResult {
    RealMatrix fim;       // D x D
    RealVector crb_diag;  // diag(fim^-1), +inf everywhere when fim is singular
};

FisherResult fisher_crb(const RealMatrix& jacobian, const RealMatrix& covariance);

/// chi_j = sum_i (dtheta_j / dx_i)^2 / C_jj, zero when C_jj is at the ridge
/// floor. Larger means more positional information in element j.
RealVector element_scores(const RealMatrix& jacobian, const RealMatrix& covariance, double ridge);
RealVector element_scores(const PositionParams& x, const Scenario& scenario, const CrbConfig& cfg, int k = 1);

/// -log10(crb); +inf maps to -inf.
double nl_crb(double crb);

} // namespace bfisense
