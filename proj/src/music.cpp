#include <cmath>
#include <numbers>

#include "bfisense/eval.hpp"
#include "bfisense/parallel.hpp"

namespace bfisense {

namespace {

// ||(I - Vs Vs^*) a||^2; the MUSIC spectrum is its reciprocal.
double null_energy(const ComplexMatrix& vs, const ComplexVector& a)
{
    const ComplexVector r = a - vs * (vs.adjoint() * a);
    return r.squaredNorm();
}

ComplexMatrix signal_subspace(const ComplexMatrix& v, int n_paths)
{
    if (n_paths < 1 || n_paths > v.cols())
        throw InvalidInput("music: n_paths must lie in [1, " + std::to_string(v.cols()) + "]");
    return v.leftCols(n_paths);
}

} // namespace

std::vector<double> aod_grid(double step_deg)
{
    if (!(step_deg > 0.0) || step_deg > 180.0)
        throw InvalidInput("aod_grid: step must lie in (0, 180] degrees");
    std::vector<double> grid;
    const int n = static_cast<int>(std::floor(180.0 / step_deg + 1e-9));
    for (int i = 0; i <= n; ++i)
        grid.push_back((-90.0 + i * step_deg) * std::numbers::pi / 180.0);
    return grid;
}

ComplexVector tx_steering(double aod, const ArrayGeometry& geom, double wavelength)
{
    ComplexVector a(geom.n_tx);
    const double scale = 1.0 / std::sqrt(double(geom.n_tx));
    for (int m = 0; m < geom.n_tx; ++m)
        a(m) = std::polar(scale, 2.0 * std::numbers::pi / wavelength * std::sin(aod) * m * geom.tx_spacing);
    return a;
}

std::vector<double> music_spectrum(const ComplexMatrix& v, std::span<const double> grid, const ArrayGeometry& geom,
                                   double wavelength, int n_paths)
{
    if (v.rows() != geom.n_tx)
        throw InvalidInput("music: steering matrix has " + std::to_string(v.rows()) + " rows, array has " +
                           std::to_string(geom.n_tx) + " Tx antennas");
    const ComplexMatrix vs = signal_subspace(v, n_paths);
    std::vector<double> out;
    out.reserve(grid.size());
    for (double rho : grid)
        out.push_back(1.0 / null_energy(vs, tx_steering(rho, geom, wavelength)));
    return out;
}

double music_estimate_aod(const Bfi& theta, std::span<const double> grid, const ArrayGeometry& geom, double wavelength,
                          const MusicOptions& opts)
{
    if (grid.empty())
        throw InvalidInput("music: empty AoD grid");
    const ComplexMatrix vs = signal_subspace(givens_reconstruct(theta), opts.n_paths);
    if (vs.rows() != geom.n_tx)
        throw InvalidInput("music: BFI has " + std::to_string(vs.rows()) + " Tx rows, array has " +
                           std::to_string(geom.n_tx));
    auto energy = [&](double rho) { return null_energy(vs, tx_steering(rho, geom, wavelength)); };

    std::size_t best = 0;
    double best_e = energy(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double e = energy(grid[i]);
        if (e < best_e) {
            best_e = e;
            best = i;
        }
    }
    if (!opts.refine || grid.size() < 2)
        return grid[best];

    // Golden-section search on the bracket formed by the grid neighbours.
    const double half_pi = std::numbers::pi / 2.0;
    double lo = best > 0 ? grid[best - 1] : std::max(-half_pi, grid[0] - (grid[1] - grid[0]));
    double hi = best + 1 < grid.size() ? grid[best + 1] : std::min(half_pi, grid[best] + (grid[best] - grid[best - 1]));
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - g * (hi - lo);
    double b = lo + g * (hi - lo);
    double ea = energy(a);
    double eb = energy(b);
    for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
        if (ea < eb) {
            hi = b;
            b = a;
            eb = ea;
            a = hi - g * (hi - lo);
            ea = energy(a);
        } else {
            lo = a;
            a = b;
            ea = eb;
            b = lo + g * (hi - lo);
            eb = energy(b);
        }
    }
    const double mid = 0.5 * (lo + hi);
    // Never return something worse than the grid point itself.
    return energy(mid) <= best_e ? mid : grid[best];
}

std::vector<McPoint> mc_estimator_variance(const Scenario& scenario, const Pose& pose, const McConfig& mc,
                                           const CrbConfig& crb_cfg, int workers)
{
    if (mc.trials < 100)
        throw InvalidInput("music-mc: need at least 100 trials, got " + std::to_string(mc.trials));
    if (mc.snr_db.empty())
        throw InvalidInput("music-mc: empty SNR list");
    crb_cfg.validate();
    const std::vector<double> grid = aod_grid(mc.grid_step_deg);
    const double lambda = scenario.grid.wavelength(mc.k);
    const ComplexMatrix h_bar = scenario.mean_csi(pose, mc.k);

    std::vector<McPoint> out;
    for (std::size_t s = 0; s < mc.snr_db.size(); ++s) {
        const double snr = mc.snr_db[s];
        const double var = noise_var_for_snr(h_bar, snr);
        const std::uint64_t snr_seed = derive_seed(mc.seed, s);
        std::vector<double> est(static_cast<std::size_t>(mc.trials));
        parallel_for(est.size(), workers, [&](std::size_t t) {
            std::mt19937_64 rng(derive_seed(snr_seed, t));
            const Bfi theta = csi_to_bfi(csi_sample(h_bar, var, rng));
            est[t] = music_estimate_aod(theta, grid, scenario.geometry, lambda, mc.music);
        });
        McPoint p;
        p.snr_db = snr;
        for (double e : est)
            p.mc_mean += e;
        p.mc_mean /= double(est.size());
        for (double e : est)
            p.mc_variance += (e - p.mc_mean) * (e - p.mc_mean);
        p.mc_variance /= double(est.size() - 1);

        Scenario local = scenario;
        local.snr_db = snr;
        local.nominal = pose;
        PositionParams x{{"aod"}, RealVector::Constant(1, pose.aod)};
        CrbConfig cfg = crb_cfg;
        cfg.seed = derive_seed(crb_cfg.seed, s);
        const GaussianModel model = estimate_moments(x, local, cfg, mc.k);
        p.crb = fisher_crb(bfi_jacobian(x, local, cfg, mc.k), model.covariance).crb_diag(0);
        out.push_back(p);
    }
    return out;
}

} // namespace bfisense
