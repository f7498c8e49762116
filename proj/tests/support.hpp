#ifndef SRMCAL_TESTS_SUPPORT_HPP
#define SRMCAL_TESTS_SUPPORT_HPP

#include <complex>
#include <vector>

#include "srmcal/srm.hpp"
#include "srmcal/synth.hpp"

namespace test {

using srmcal::complex;
using srmcal::matrix2;
using srmcal::sparams;

// Deterministic draws for tests.
inline srmcal::rng make_rng(std::uint64_t seed) {
    return srmcal::rng::for_stream(seed, 0x7E57);
}

inline complex disk(srmcal::rng& r, double radius = 1.0) {
    for (;;) {
        const complex z{2.0 * r.uniform() - 1.0, 2.0 * r.uniform() - 1.0};
        if (std::abs(z) <= 1.0) return radius * z;
    }
}

inline complex ring(srmcal::rng& r, double lo, double hi) {
    const double mag = lo + (hi - lo) * r.uniform();
    const double ph = 2.0 * 3.14159265358979323846 * r.uniform();
    return std::polar(mag, ph);
}

// Random invertible error box with e22 = 1 and moderate off-diagonals.
inline matrix2 random_box(srmcal::rng& r) {
    for (;;) {
        const matrix2 m{ring(r, 0.7, 1.2), ring(r, 0.05, 0.3),
                        ring(r, 0.05, 0.3), complex{1.0, 0.0}};
        if (std::abs(m.det()) > 0.3) return m;
    }
}

inline srmcal::error_terms random_terms(srmcal::rng& r) {
    const matrix2 a = random_box(r);
    const matrix2 b = random_box(r);
    srmcal::error_terms t;
    t.a11 = a.e11;
    t.a12 = a.e12;
    t.a21 = a.e21;
    t.b11 = b.e11;
    t.b12 = b.e12;
    t.b21 = b.e21;
    t.k = ring(r, 0.5, 1.5);
    return t;
}

// Random passive-ish two-port with a transmissive s21.
inline sparams random_two_port(srmcal::rng& r, double s21_floor = 0.2) {
    sparams s;
    s.s11 = disk(r, 0.4);
    s.s22 = disk(r, 0.4);
    s.s21 = ring(r, s21_floor, 0.95);
    s.s12 = s.s21; // reciprocal by default
    return s;
}

inline double max_entry_diff(const matrix2& a, const matrix2& b) {
    return (a - b).max_abs();
}

// Distance between two matrices as representatives of the same projective
// class (largest-entry normalization on both sides).
inline double projective_diff(const matrix2& a, const matrix2& b) {
    return max_entry_diff(srmcal::normalized(a), srmcal::normalized(b));
}

inline double rel_diff(const complex& a, const complex& b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-30});
    return std::abs(a - b) / scale;
}

// Largest relative per-term deviation of two error models at one frequency.
inline double terms_rel_diff(const srmcal::error_terms& x,
                             const srmcal::error_terms& y) {
    double worst = 0.0;
    const complex* xs[7] = {&x.a11, &x.a12, &x.a21, &x.b11, &x.b12, &x.b21, &x.k};
    const complex* ys[7] = {&y.a11, &y.a12, &y.a21, &y.b11, &y.b12, &y.b21, &y.k};
    for (int i = 0; i < 7; ++i) {
        worst = std::max(worst, rel_diff(*xs[i], *ys[i]));
    }
    return worst;
}

inline double models_rel_diff(const srmcal::error_model& a,
                              const srmcal::error_model& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, terms_rel_diff(a.terms[i], b.terms[i]));
    }
    return worst;
}

// Forward model for one symmetric load seen at both ports, evaluated
// directly from the per-port ratio definitions rather than through the
// library embed path.
inline srmcal::reflection_pair embed_pair_direct(const srmcal::error_terms& t,
                                                 const complex& rho) {
    const complex ga = (t.a11 * rho + t.a12) / (t.a21 * rho + 1.0);
    const complex gb = (t.b11 * rho - t.b21) / (1.0 - t.b12 * rho);
    return {ga, gb};
}

} // namespace test

#endif
