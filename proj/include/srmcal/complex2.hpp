#ifndef SRMCAL_COMPLEX2_HPP
#define SRMCAL_COMPLEX2_HPP

#include <cmath>
#include <complex>

#include "srmcal/errors.hpp"

namespace srmcal {

using complex = std::complex<double>;

inline bool is_finite(const complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// 2x2 complex matrix, row-major entries e11 e12 / e21 e22.
// Carries T-parameters, error boxes and Mobius coefficient matrices.
struct matrix2 {
    complex e11{1.0, 0.0};
    complex e12{0.0, 0.0};
    complex e21{0.0, 0.0};
    complex e22{1.0, 0.0};

    static matrix2 identity() { return matrix2{}; }

    complex det() const { return e11 * e22 - e12 * e21; }

    matrix2 transpose() const { return {e11, e21, e12, e22}; }

    // Largest entry magnitude.
    double max_abs() const {
        return std::max(std::max(std::abs(e11), std::abs(e12)),
                        std::max(std::abs(e21), std::abs(e22)));
    }
};

inline matrix2 operator*(const matrix2& a, const matrix2& b) {
    return {a.e11 * b.e11 + a.e12 * b.e21, a.e11 * b.e12 + a.e12 * b.e22,
            a.e21 * b.e11 + a.e22 * b.e21, a.e21 * b.e12 + a.e22 * b.e22};
}

inline matrix2 operator*(const complex& s, const matrix2& m) {
    return {s * m.e11, s * m.e12, s * m.e21, s * m.e22};
}

inline matrix2 operator-(const matrix2& a, const matrix2& b) {
    return {a.e11 - b.e11, a.e12 - b.e12, a.e21 - b.e21, a.e22 - b.e22};
}

// T-matrix cascade is plain matrix multiplication.
inline matrix2 cascade(const matrix2& a, const matrix2& b) { return a * b; }

// Port-swap permutation: its own transpose and inverse.
inline matrix2 port_swap() { return {0.0, 1.0, 1.0, 0.0}; }

inline matrix2 inverse(const matrix2& m, double det_floor = 1e-30) {
    const complex d = m.det();
    if (std::abs(d) < det_floor) {
        throw singular_matrix("2x2 inverse: |det| below floor");
    }
    return {m.e22 / d, -m.e12 / d, -m.e21 / d, m.e11 / d};
}

// Divide by the largest-magnitude entry. Canonical representative of the
// nonzero-scalar equivalence class; ties keep the first entry row-major.
inline matrix2 normalized(const matrix2& m) {
    const complex entries[4] = {m.e11, m.e12, m.e21, m.e22};
    complex pivot = entries[0];
    double best = std::abs(entries[0]);
    for (int i = 1; i < 4; ++i) {
        const double mag = std::abs(entries[i]);
        if (mag > best) {
            best = mag;
            pivot = entries[i];
        }
    }
    if (best == 0.0) {
        throw normalization_failure("normalized: zero matrix");
    }
    return (complex{1.0, 0.0} / pivot) * m;
}

// Two-port scattering parameters. No passivity assumed.
struct sparams {
    complex s11{0.0, 0.0};
    complex s12{0.0, 0.0};
    complex s21{0.0, 0.0};
    complex s22{0.0, 0.0};

    complex det() const { return s11 * s22 - s12 * s21; }

    static sparams thru() { return {0.0, 1.0, 1.0, 0.0}; }

    bool all_finite() const {
        return is_finite(s11) && is_finite(s12) && is_finite(s21) && is_finite(s22);
    }
};

// T = (1/s21) [[-det S, s11], [-s22, 1]].
// Wave convention: (b1, a1)^T = T (a2, b2)^T, so cascades multiply left to right.
inline matrix2 s_to_t(const sparams& s, double s21_floor = 1e-30) {
    if (std::abs(s.s21) < s21_floor) {
        throw non_transmissive("s_to_t: |s21| below transmissivity floor");
    }
    const complex inv = complex{1.0, 0.0} / s.s21;
    return {-s.det() * inv, s.s11 * inv, -s.s22 * inv, inv};
}

inline sparams t_to_s(const matrix2& t, double floor = 1e-30) {
    if (std::abs(t.e22) < floor) {
        throw singular_conversion("t_to_s: |t22| below floor");
    }
    return {t.e12 / t.e22, t.det() / t.e22, complex{1.0, 0.0} / t.e22,
            -t.e21 / t.e22};
}

// Reflection seen into port 1 of a two-port T terminated with rho at port 2.
inline complex input_reflection(const matrix2& t, const complex& rho,
                                double floor = 1e-30) {
    const complex den = t.e21 * rho + t.e22;
    if (std::abs(den) < floor) {
        throw pole_input("input_reflection: denominator below floor");
    }
    return (t.e11 * rho + t.e12) / den;
}

// Reflection seen into port 2 of a two-port T terminated with rho at port 1.
inline complex output_reflection(const matrix2& t, const complex& rho,
                                 double floor = 1e-30) {
    const complex den = t.e22 - t.e12 * rho;
    if (std::abs(den) < floor) {
        throw pole_input("output_reflection: denominator below floor");
    }
    return (t.e11 * rho - t.e21) / den;
}

} // namespace srmcal

#endif
