#pragma once

// CSI -> BFI compression as done for 802.11 explicit beamforming feedback:
// right singular vectors, truncation / zero padding to N columns, phase
// rotation to a real last row, and Givens-rotation angles (phi, psi).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bfisense/numerics.hpp"

namespace bfisense {

enum class AngleKind { phi, psi };

const char* to_string(AngleKind kind);
AngleKind angle_kind_from_string(const std::string& s);

/// (kind, row l, column i), 1-based as in the Givens product.
/// phi: i <= l <= M-1,  psi: i+1 <= l <= M.
struct BfiElementLabel {
    AngleKind kind = AngleKind::phi;
    int row = 1;
    int col = 1;

    bool operator==(const BfiElementLabel&) const = default;
};

std::string to_string(const BfiElementLabel& label); // e.g. "phi_21"

struct BfiElement {
    BfiElementLabel label;
    double value = 0.0; // rad; phi in [0, 2pi), psi in [0, pi/2]
};

struct Bfi {
    int m_tx = 2;
    int n_rx = 1;
    std::vector<BfiElement> elements;
    // Set when the steering matrix was not unique (tied singular values or a
    // vanishing last-row entry); the angles follow the SVD convention then.
    bool degenerate = false;

    std::size_t size() const { return elements.size(); }
    RealVector values() const;
    std::vector<AngleKind> kinds() const;
};

/// N_BFI = 2MS - S^2 - S with S = min(N, M-1).
int bfi_element_count(int n_rx, int m_tx);

/// Canonical order: for i = 1..S, phi_{i,i}..phi_{M-1,i} then psi_{i+1,i}..psi_{M,i}.
std::vector<BfiElementLabel> bfi_labels(int n_rx, int m_tx);

/// Builds a Bfi from values in canonical order.
Bfi make_bfi(int n_rx, int m_tx, std::span<const double> values);

/// M x M right-singular matrix of H (columns by descending singular value).
ComplexMatrix rsvd_steering(const ComplexMatrix& h);

/// Keep the first n_rx columns, or append zero columns up to n_rx.
ComplexMatrix resize(const ComplexMatrix& v, int n_rx);

/// Multiply each column by exp(-i angle(last entry)); angle(0) := 0.
ComplexMatrix rotate_real_last_row(const ComplexMatrix& v_hat);

/// Givens-rotation angles of an M x N matrix with orthonormal (or zero
/// padded) columns and a real nonnegative last row.
Bfi givens_decompose(const ComplexMatrix& v_tilde);

/// prod_{i=1..S} ( D_i prod_{l=i+1..M} G_{l,i}^T ) I_{M x N}.
ComplexMatrix givens_reconstruct(const Bfi& theta);

/// Steps i-iii of the feedback chain (quantization is separate).
Bfi csi_to_bfi(const ComplexMatrix& h);

struct Angles2x2 {
    double phi = 0.0;
    double psi = 0.0;
};

/// Closed-form (phi, psi) of a 2x2 channel from entry magnitudes and phases.
/// Throws DegenerateInput when the phase-difference sum vanishes.
Angles2x2 closed_form_2x2(const ComplexMatrix& h);

/// Compressed-beamforming style codebook: b_phi = b_psi + 2 bits,
/// phi code k -> (2k+1) pi / 2^b_phi, psi code k -> (2k+1) pi / 2^(b_psi+2).
struct QuantizedBfi {
    int m_tx = 2;
    int n_rx = 1;
    int b_psi = 7;
    int b_phi = 9;
    std::vector<std::uint32_t> codes; // canonical element order
};

QuantizedBfi quantize(const Bfi& theta, int b_psi);
Bfi dequantize(const QuantizedBfi& q);

double dequantize_phi(std::uint32_t code, int b_phi);
double dequantize_psi(std::uint32_t code, int b_psi);

/// Wire format: byte 0 = b_psi, byte 1 = reserved (0), then every code in
/// canonical order, LSB first, b_phi or b_psi bits wide, into a bit stream
/// that fills each byte from its least significant bit. The last byte is
/// zero padded.
std::vector<std::uint8_t> pack(const QuantizedBfi& q);
QuantizedBfi unpack(std::span<const std::uint8_t> bytes, int n_rx, int m_tx);

} // namespace bfisense
