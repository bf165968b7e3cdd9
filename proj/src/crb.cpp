#include "bfisense/crb.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace bfisense {

namespace {

constexpr double kPi = std::numbers::pi;

bool known_parameter(const std::string& n)
{
    return n == "aod" || n == "aoa" || n == "distance" || n == "x" || n == "y";
}

Bfi bfi_at(const Pose& pose, const Scenario& scenario, int k)
{
    return csi_to_bfi(scenario.mean_csi(pose, k));
}

} // namespace

bool is_angle_parameter(const std::string& name) { return name == "aod" || name == "aoa"; }

void PositionParams::validate() const
{
    if (values.size() < 1)
        throw InvalidInput("position: need at least one parameter");
    if (static_cast<std::size_t>(values.size()) != names.size())
        throw InvalidInput("position: names and values differ in length");
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!known_parameter(names[i]))
            throw InvalidInput("position: unknown parameter '" + names[i] + "'");
        for (std::size_t j = 0; j < i; ++j)
            if (names[i] == names[j])
                throw InvalidInput("position: duplicate parameter '" + names[i] + "'");
        if (!std::isfinite(values(static_cast<Eigen::Index>(i))))
            throw InvalidInput("position: non-finite value for '" + names[i] + "'");
    }
}

Pose resolve_pose(const PositionParams& x, const Pose& base)
{
    x.validate();
    bool planar = false;
    bool polar = false;
    double px = base.x();
    double py = base.y();
    Pose pose = base;
    for (std::size_t i = 0; i < x.names.size(); ++i) {
        const double v = x.values(static_cast<Eigen::Index>(i));
        const std::string& n = x.names[i];
        if (n == "x") {
            px = v;
            planar = true;
        } else if (n == "y") {
            py = v;
            planar = true;
        } else if (n == "aod") {
            pose.aod = v;
            polar = true;
        } else if (n == "distance") {
            pose.distance = v;
            polar = true;
        }
    }
    if (planar && polar)
        throw InvalidInput("position: mixes planar (x, y) and polar (aod, distance) coordinates");
    if (planar)
        pose = pose_from_xy(px, py);
    for (std::size_t i = 0; i < x.names.size(); ++i)
        if (x.names[i] == "aoa")
            pose.aoa = x.values(static_cast<Eigen::Index>(i));
    return pose;
}

void CrbConfig::validate() const
{
    if (n_mc < 2)
        throw InvalidInput("crb: n_mc must be >= 2");
    if (!(fd_step_angle > 0.0) || !(fd_step_distance > 0.0) || !(ridge > 0.0))
        throw InvalidInput("crb: finite-difference steps and ridge must be positive");
}

double periodic_diff(AngleKind kind, double value, double reference)
{
    const double d = value - reference;
    if (kind == AngleKind::phi)
        return d - 2.0 * kPi * std::floor((d + kPi) / (2.0 * kPi));
    return d - (kPi / 2.0) * std::floor((d + kPi / 4.0) / (kPi / 2.0));
}

RealVector periodic_diff(const Bfi& theta, const Bfi& theta_bar)
{
    if (theta.elements.size() != theta_bar.elements.size())
        throw InvalidInput("periodic_diff: BFI vectors differ in length");
    RealVector out(static_cast<Eigen::Index>(theta.elements.size()));
    for (std::size_t j = 0; j < theta.elements.size(); ++j) {
        const auto& a = theta.elements[j];
        const auto& b = theta_bar.elements[j];
        if (!(a.label == b.label))
            throw InvalidInput("periodic_diff: element labels do not match");
        out(static_cast<Eigen::Index>(j)) = periodic_diff(a.label.kind, a.value, b.value);
    }
    return out;
}

Bfi mean_bfi(const PositionParams& x, const Scenario& scenario, int k)
{
    const Pose pose = resolve_pose(x, scenario.nominal);
    Bfi b = bfi_at(pose, scenario, k);
    if (b.degenerate) {
        std::ostringstream os;
        os << "degenerate steering matrix at aod=" << pose.aod << " rad, aoa=" << pose.aoa
           << " rad, distance=" << pose.distance << " m (subcarrier " << k << ")";
        throw DegenerateInput(os.str());
    }
    return b;
}

GaussianModel estimate_moments(const PositionParams& x, const Scenario& scenario, const CrbConfig& cfg, int k)
{
    cfg.validate();
    GaussianModel model;
    model.mean = mean_bfi(x, scenario, k);
    const Pose pose = resolve_pose(x, scenario.nominal);
    const ComplexMatrix h_bar = scenario.mean_csi(pose, k);
    const double variance = noise_var_for_snr(h_bar, scenario.snr_db);

    const Eigen::Index n = static_cast<Eigen::Index>(model.mean.size());
    RealMatrix acc = RealMatrix::Zero(n, n);
    if (variance > 0.0) {
        std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
        for (int j = 0; j < cfg.n_mc; ++j) {
            const Bfi theta = csi_to_bfi(csi_sample(h_bar, variance, rng));
            const RealVector d = periodic_diff(theta, model.mean);
            acc.selfadjointView<Eigen::Lower>().rankUpdate(d);
        }
        acc = acc.selfadjointView<Eigen::Lower>();
        acc /= double(cfg.n_mc - 1);
    }
    acc.diagonal().array() += cfg.ridge;
    model.covariance = acc;
    model.n_samples = cfg.n_mc;
    return model;
}

RealMatrix bfi_jacobian(const PositionParams& x, const Scenario& scenario, const CrbConfig& cfg, int k)
{
    cfg.validate();
    x.validate();
    const Bfi center = mean_bfi(x, scenario, k);
    RealMatrix jac(static_cast<Eigen::Index>(center.size()), x.dim());
    for (Eigen::Index i = 0; i < x.dim(); ++i) {
        const std::string& name = x.names[static_cast<std::size_t>(i)];
        const double h = is_angle_parameter(name) ? cfg.fd_step_angle : cfg.fd_step_distance;
        PositionParams plus = x;
        PositionParams minus = x;
        plus.values(i) += h;
        minus.values(i) -= h;
        Bfi up;
        Bfi down;
        try {
            up = mean_bfi(plus, scenario, k);
            down = mean_bfi(minus, scenario, k);
        } catch (const DegenerateInput& e) {
            throw DegenerateInput(std::string("finite difference along '") + name + "' crosses a degenerate position: " + e.what());
        }
        jac.col(i) = periodic_diff(up, down) / (2.0 * h);
    }
    return jac;
}

FisherResult fisher_crb(const RealMatrix& jacobian, const RealMatrix& covariance)
{
    const Eigen::Index n = jacobian.rows();
    if (covariance.rows() != n || covariance.cols() != n)
        throw InvalidInput("fisher_crb: covariance must be N_BFI x N_BFI");
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidInput("fisher_crb: covariance is not symmetric");

    Eigen::LLT<RealMatrix> llt(covariance);
    if (llt.info() != Eigen::Success)
        throw InvalidInput("fisher_crb: covariance is not positive definite");

    FisherResult out;
    const RealMatrix whitened = llt.matrixL().solve(jacobian); // L^-1 J
    out.fim = whitened.transpose() * whitened;
    const Eigen::Index d = out.fim.rows();
    out.crb_diag = RealVector::Constant(d, std::numeric_limits<double>::infinity());

    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(out.fim);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmax > 0.0) || lmin <= 1e-12 * lmax)
        return out;
    const RealMatrix inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    out.crb_diag = inv.diagonal();
    return out;
}

RealVector element_scores(const RealMatrix& jacobian, const RealMatrix& covariance, double ridge)
{
    if (covariance.rows() != jacobian.rows() || covariance.cols() != jacobian.rows())
        throw InvalidInput("element_scores: covariance must be N_BFI x N_BFI");
    RealVector chi(jacobian.rows());
    for (Eigen::Index j = 0; j < jacobian.rows(); ++j) {
        const double var = covariance(j, j);
        chi(j) = (var <= 2.0 * ridge) ? 0.0 : jacobian.row(j).squaredNorm() / var;
    }
    return chi;
}

RealVector element_scores(const PositionParams& x, const Scenario& scenario, const CrbConfig& cfg, int k)
{
    const GaussianModel model = estimate_moments(x, scenario, cfg, k);
    const RealMatrix jac = bfi_jacobian(x, scenario, cfg, k);
    return element_scores(jac, model.covariance, cfg.ridge);
}

double nl_crb(double crb)
{
    if (std::isinf(crb) && crb > 0)
        return -std::numeric_limits<double>::infinity();
    if (!(crb > 0.0))
        throw InvalidInput("nl_crb: CRB must be positive");
    return -std::log10(crb);
}

} // namespace bfisense
