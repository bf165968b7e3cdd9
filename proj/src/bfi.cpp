#include "bfisense/bfi.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace bfisense {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Below this norm the pivot column is treated as e_M: its phases are free.
constexpr double kPivotFloor = 1e-9;
// Relative singular-value gap (and last-row modulus) below which the
// steering matrix is flagged as not unique.
constexpr double kDegenerateGap = 1e-8;

double wrap_2pi(double a)
{
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    if (r >= kTwoPi)
        r = 0.0;
    return r;
}

double arg0(std::complex<double> z) { return (z == std::complex<double>(0.0, 0.0)) ? 0.0 : std::arg(z); }

int subspace_dim(int n_rx, int m_tx) { return std::min(n_rx, m_tx - 1); }

void check_shape(int n_rx, int m_tx)
{
    if (n_rx < 1)
        throw InvalidInput("BFI needs n_rx >= 1");
    if (m_tx < 2)
        throw InvalidInput("BFI needs m_tx >= 2");
}

} // namespace

const char* to_string(AngleKind kind) { return kind == AngleKind::phi ? "phi" : "psi"; }

AngleKind angle_kind_from_string(const std::string& s)
{
    if (s == "phi")
        return AngleKind::phi;
    if (s == "psi")
        return AngleKind::psi;
    throw InvalidInput("unknown BFI angle kind '" + s + "'");
}

std::string to_string(const BfiElementLabel& label)
{
    std::ostringstream os;
    os << to_string(label.kind) << '_' << label.row << label.col;
    return os.str();
}

RealVector Bfi::values() const
{
    RealVector v(static_cast<Eigen::Index>(elements.size()));
    for (std::size_t j = 0; j < elements.size(); ++j)
        v(static_cast<Eigen::Index>(j)) = elements[j].value;
    return v;
}

std::vector<AngleKind> Bfi::kinds() const
{
    std::vector<AngleKind> out;
    out.reserve(elements.size());
    for (const auto& e : elements)
        out.push_back(e.label.kind);
    return out;
}

int bfi_element_count(int n_rx, int m_tx)
{
    check_shape(n_rx, m_tx);
    const int s = subspace_dim(n_rx, m_tx);
    return 2 * m_tx * s - s * s - s;
}

std::vector<BfiElementLabel> bfi_labels(int n_rx, int m_tx)
{
    check_shape(n_rx, m_tx);
    const int s = subspace_dim(n_rx, m_tx);
    std::vector<BfiElementLabel> out;
    for (int i = 1; i <= s; ++i) {
        for (int l = i; l <= m_tx - 1; ++l)
            out.push_back({AngleKind::phi, l, i});
        for (int l = i + 1; l <= m_tx; ++l)
            out.push_back({AngleKind::psi, l, i});
    }
    return out;
}

Bfi make_bfi(int n_rx, int m_tx, std::span<const double> values)
{
    const auto labels = bfi_labels(n_rx, m_tx);
    if (values.size() != labels.size())
        throw InvalidInput("make_bfi: expected " + std::to_string(labels.size()) + " values, got " + std::to_string(values.size()));
    Bfi b;
    b.m_tx = m_tx;
    b.n_rx = n_rx;
    for (std::size_t j = 0; j < labels.size(); ++j)
        b.elements.push_back({labels[j], values[j]});
    return b;
}

ComplexMatrix rsvd_steering(const ComplexMatrix& h)
{
    if (h.size() == 0)
        throw InvalidInput("rsvd_steering: empty matrix");
    if (!all_finite(h))
        throw InvalidInput("rsvd_steering: CSI contains NaN or Inf");
    if (h.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateInput("rsvd_steering: zero CSI matrix has no steering direction");
    return svd(h).v;
}

ComplexMatrix resize(const ComplexMatrix& v, int n_rx)
{
    if (v.rows() != v.cols())
        throw InvalidInput("resize: steering matrix must be square");
    if (n_rx < 1)
        throw InvalidInput("resize: n_rx must be >= 1");
    const Eigen::Index m = v.rows();
    if (n_rx <= m)
        return v.leftCols(n_rx);
    ComplexMatrix out = ComplexMatrix::Zero(m, n_rx);
    out.leftCols(m) = v;
    return out;
}

ComplexMatrix rotate_real_last_row(const ComplexMatrix& v_hat)
{
    ComplexMatrix out = v_hat;
    const Eigen::Index last = v_hat.rows() - 1;
    for (Eigen::Index j = 0; j < v_hat.cols(); ++j) {
        const std::complex<double> z = v_hat(last, j);
        if (z == std::complex<double>(0.0, 0.0))
            continue;
        out.col(j) *= std::conj(z) / std::abs(z);
        out(last, j) = std::abs(z); // exact real, no rounding residue
    }
    return out;
}

Bfi givens_decompose(const ComplexMatrix& v_tilde)
{
    const int m = static_cast<int>(v_tilde.rows());
    const int n = static_cast<int>(v_tilde.cols());
    check_shape(n, m);
    if (!all_finite(v_tilde))
        throw InvalidInput("givens_decompose: matrix contains NaN or Inf");

    // Columns beyond M are zero padding; the first min(N, M) are orthonormal.
    const ComplexMatrix gram = v_tilde.adjoint() * v_tilde;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double want = (a == b && a < m) ? 1.0 : 0.0;
            if (std::abs(gram(a, b) - want) > 1e-6)
                throw InvalidInput("givens_decompose: columns are not orthonormal");
        }
    for (int j = 0; j < n; ++j) {
        const auto z = v_tilde(m - 1, j);
        if (std::abs(z.imag()) > 1e-6 || z.real() < -1e-6)
            throw InvalidInput("givens_decompose: last row must be real and nonnegative");
    }

    const int s = subspace_dim(n, m);
    ComplexMatrix omega = v_tilde;
    Bfi out;
    out.m_tx = m;
    out.n_rx = n;

    for (int i = 0; i < s; ++i) {
        std::vector<double> phi(static_cast<std::size_t>(m - 1 - i), 0.0);
        const double pivot_norm = omega.col(i).segment(i, m - 1 - i).norm();
        if (pivot_norm > kPivotFloor) {
            for (int l = i; l < m - 1; ++l)
                phi[static_cast<std::size_t>(l - i)] = wrap_2pi(arg0(omega(l, i)));
        } else {
            // Column i is e_M up to rounding, so G_{M,i} swaps rows i and M.
            // Only phi_{i,i} survives that swap: it must leave the later
            // columns' last-row entries real and nonnegative.
            int best = -1;
            double best_mag = 0.0;
            for (int j = i + 1; j < n; ++j)
                if (std::abs(omega(i, j)) > best_mag) {
                    best_mag = std::abs(omega(i, j));
                    best = j;
                }
            if (best >= 0 && best_mag > kPivotFloor)
                phi[0] = wrap_2pi(arg0(-omega(i, best)));
        }
        for (int l = i; l < m - 1; ++l)
            omega.row(l) *= std::polar(1.0, -phi[static_cast<std::size_t>(l - i)]);
        for (int l = i; l < m - 1; ++l)
            out.elements.push_back({{AngleKind::phi, l + 1, i + 1}, phi[static_cast<std::size_t>(l - i)]});

        for (int l = i + 1; l < m; ++l) {
            const double a = omega(i, i).real();
            const double b = std::abs(omega(l, i));
            double psi = std::atan2(b, a);
            psi = std::clamp(psi, 0.0, kPi / 2);
            const double c = std::cos(psi);
            const double sn = std::sin(psi);
            for (int col = 0; col < n; ++col) {
                const auto ri = omega(i, col);
                const auto rl = omega(l, col);
                omega(i, col) = c * ri + sn * rl;
                omega(l, col) = -sn * ri + c * rl;
            }
            out.elements.push_back({{AngleKind::psi, l + 1, i + 1}, psi});
        }
    }
    return out;
}

ComplexMatrix givens_reconstruct(const Bfi& theta)
{
    const int m = theta.m_tx;
    const int n = theta.n_rx;
    const auto labels = bfi_labels(n, m);
    if (theta.elements.size() != labels.size())
        throw InvalidInput("givens_reconstruct: wrong number of BFI elements");
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const auto& e = theta.elements[j];
        if (!(e.label == labels[j]))
            throw InvalidInput("givens_reconstruct: elements are not in canonical order");
        const double hi = e.label.kind == AngleKind::phi ? kTwoPi : kPi / 2;
        const bool ok = e.label.kind == AngleKind::phi ? (e.value >= -1e-12 && e.value < hi + 1e-12)
                                                       : (e.value >= -1e-12 && e.value <= hi + 1e-12);
        if (!ok)
            throw InvalidInput("givens_reconstruct: " + to_string(e.label) + " out of range");
    }

    const int s = subspace_dim(n, m);
    ComplexMatrix v = ComplexMatrix::Identity(m, n);

    // Index of the first element of block i in canonical order.
    std::vector<std::size_t> block_start(static_cast<std::size_t>(s) + 1, 0);
    for (int i = 0; i < s; ++i)
        block_start[static_cast<std::size_t>(i) + 1] = block_start[static_cast<std::size_t>(i)] + static_cast<std::size_t>(2 * (m - 1 - i));

    for (int i = s - 1; i >= 0; --i) {
        const std::size_t base = block_start[static_cast<std::size_t>(i)];
        const std::size_t n_phi = static_cast<std::size_t>(m - 1 - i);
        for (int l = m - 1; l >= i + 1; --l) {
            const double psi = theta.elements[base + n_phi + static_cast<std::size_t>(l - i - 1)].value;
            const double c = std::cos(psi);
            const double sn = std::sin(psi);
            for (int col = 0; col < n; ++col) {
                const auto ri = v(i, col);
                const auto rl = v(l, col);
                v(i, col) = c * ri - sn * rl;
                v(l, col) = sn * ri + c * rl;
            }
        }
        for (int l = i; l < m - 1; ++l)
            v.row(l) *= std::polar(1.0, theta.elements[base + static_cast<std::size_t>(l - i)].value);
    }
    return v;
}

Bfi csi_to_bfi(const ComplexMatrix& h)
{
    if (h.size() == 0)
        throw InvalidInput("csi_to_bfi: empty matrix");
    if (!all_finite(h))
        throw InvalidInput("csi_to_bfi: CSI contains NaN or Inf");
    if (h.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateInput("csi_to_bfi: zero CSI matrix");
    const int n = static_cast<int>(h.rows());
    const int m = static_cast<int>(h.cols());
    check_shape(n, m);

    const auto f = svd(h);
    const ComplexMatrix v_tilde = rotate_real_last_row(resize(f.v, n));
    Bfi out = givens_decompose(v_tilde);

    const int s = subspace_dim(n, m);
    const double top = f.singular_values(0);
    for (int j = 0; j < s; ++j) {
        const double here = f.singular_values(j);
        const double next = (j + 1 < f.singular_values.size()) ? f.singular_values(j + 1) : 0.0;
        if (here - next <= kDegenerateGap * top)
            out.degenerate = true;
        if (std::abs(f.v(m - 1, j)) <= kDegenerateGap)
            out.degenerate = true;
    }
    return out;
}

Angles2x2 closed_form_2x2(const ComplexMatrix& h)
{
    if (h.rows() != 2 || h.cols() != 2)
        throw InvalidInput("closed_form_2x2: CSI must be 2x2");
    if (!all_finite(h))
        throw InvalidInput("closed_form_2x2: CSI contains NaN or Inf");

    // h_nm = a_nm exp(-i 2 pi t_nm), so 2 pi t_nm = -arg(h_nm).
    const double a11 = std::abs(h(0, 0)), a12 = std::abs(h(0, 1));
    const double a21 = std::abs(h(1, 0)), a22 = std::abs(h(1, 1));
    const double w11 = -std::arg(h(0, 0)), w12 = -std::arg(h(0, 1));
    const double w21 = -std::arg(h(1, 0)), w22 = -std::arg(h(1, 1));
    const double p1 = a11 * a12;
    const double p2 = a21 * a22;

    const double num = p1 * std::sin(w11 - w12) + p2 * std::sin(w21 - w22);
    const double den = p1 * std::cos(w11 - w12) + p2 * std::cos(w21 - w22);
    const double scale = a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22;
    if (std::hypot(num, den) <= 1e-12 * scale) {
        std::ostringstream os;
        os << "closed_form_2x2: phase-difference sum vanishes (a11*a12 = " << p1 << ", a21*a22 = " << p2
           << "); phi and psi are 0/0";
        throw DegenerateInput(os.str());
    }

    Angles2x2 out;
    out.phi = wrap_2pi(std::atan2(num, den));
    const double radicand = 4.0 * p1 * p1 + 4.0 * p2 * p2 + 8.0 * p1 * p2 * std::cos(w11 - w12 - w21 + w22);
    const double power_gap = a11 * a11 + a21 * a21 - a12 * a12 - a22 * a22;
    out.psi = std::clamp(std::atan2(std::sqrt(std::max(radicand, 0.0)), power_gap) / 2.0, 0.0, kPi / 2);
    return out;
}

double dequantize_phi(std::uint32_t code, int b_phi) { return (2.0 * code + 1.0) * kPi / std::ldexp(1.0, b_phi); }

double dequantize_psi(std::uint32_t code, int b_psi) { return (2.0 * code + 1.0) * kPi / std::ldexp(1.0, b_psi + 2); }

QuantizedBfi quantize(const Bfi& theta, int b_psi)
{
    if (b_psi < 1 || b_psi > 9)
        throw InvalidInput("quantize: b_psi must be in 1..9");
    QuantizedBfi q;
    q.m_tx = theta.m_tx;
    q.n_rx = theta.n_rx;
    q.b_psi = b_psi;
    q.b_phi = b_psi + 2;
    for (const auto& e : theta.elements) {
        std::int64_t code = 0;
        std::int64_t top = 0;
        if (e.label.kind == AngleKind::phi) {
            code = static_cast<std::int64_t>(std::floor(wrap_2pi(e.value) * std::ldexp(1.0, q.b_phi) / kTwoPi));
            top = (std::int64_t(1) << q.b_phi) - 1;
        } else {
            code = static_cast<std::int64_t>(std::floor(e.value * std::ldexp(1.0, q.b_psi + 1) / kPi));
            top = (std::int64_t(1) << q.b_psi) - 1;
        }
        q.codes.push_back(static_cast<std::uint32_t>(std::clamp<std::int64_t>(code, 0, top)));
    }
    return q;
}

Bfi dequantize(const QuantizedBfi& q)
{
    if (q.b_psi < 1 || q.b_psi > 9 || q.b_phi != q.b_psi + 2)
        throw InvalidInput("dequantize: inconsistent bit widths");
    const auto labels = bfi_labels(q.n_rx, q.m_tx);
    if (labels.size() != q.codes.size())
        throw InvalidInput("dequantize: wrong number of codes");
    Bfi out;
    out.m_tx = q.m_tx;
    out.n_rx = q.n_rx;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const bool is_phi = labels[j].kind == AngleKind::phi;
        const int bits = is_phi ? q.b_phi : q.b_psi;
        if (q.codes[j] >> bits)
            throw InvalidInput("dequantize: code exceeds its bit width");
        out.elements.push_back({labels[j], is_phi ? dequantize_phi(q.codes[j], q.b_phi) : dequantize_psi(q.codes[j], q.b_psi)});
    }
    return out;
}

std::vector<std::uint8_t> pack(const QuantizedBfi& q)
{
    const auto labels = bfi_labels(q.n_rx, q.m_tx);
    if (labels.size() != q.codes.size())
        throw InvalidInput("pack: wrong number of codes");
    std::vector<std::uint8_t> out{static_cast<std::uint8_t>(q.b_psi), 0};
    std::size_t bit = 0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const int width = labels[j].kind == AngleKind::phi ? q.b_phi : q.b_psi;
        for (int b = 0; b < width; ++b, ++bit) {
            if (bit % 8 == 0)
                out.push_back(0);
            if ((q.codes[j] >> b) & 1u)
                out.back() |= static_cast<std::uint8_t>(1u << (bit % 8));
        }
    }
    return out;
}

QuantizedBfi unpack(std::span<const std::uint8_t> bytes, int n_rx, int m_tx)
{
    if (bytes.size() < 2)
        throw InvalidInput("unpack: missing header");
    QuantizedBfi q;
    q.n_rx = n_rx;
    q.m_tx = m_tx;
    q.b_psi = bytes[0];
    q.b_phi = q.b_psi + 2;
    if (q.b_psi < 1 || q.b_psi > 9)
        throw InvalidInput("unpack: b_psi must be in 1..9");
    const auto labels = bfi_labels(n_rx, m_tx);
    std::size_t total = 0;
    for (const auto& l : labels)
        total += static_cast<std::size_t>(l.kind == AngleKind::phi ? q.b_phi : q.b_psi);
    if (bytes.size() != 2 + (total + 7) / 8)
        throw InvalidInput("unpack: payload length does not match the element layout");
    std::size_t bit = 0;
    for (const auto& l : labels) {
        const int width = l.kind == AngleKind::phi ? q.b_phi : q.b_psi;
        std::uint32_t code = 0;
        for (int b = 0; b < width; ++b, ++bit)
            if ((bytes[2 + bit / 8] >> (bit % 8)) & 1u)
                code |= 1u << b;
        q.codes.push_back(code);
    }
    return q;
}

} // namespace bfisense
